#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsc/hopfield.hpp"
#include "wsc/mlp.hpp"
#include "wsc/patterns.hpp"

namespace wsc {

struct AdversarialRecord {
    GrayImage original;
    GrayImage perturbed;
    double epsilon = 0.0;
    int true_label = -1;
    int mlp_label_clean = -1;
    int mlp_label_adv = -1;
    std::optional<int> hopfield_label_adv;  // nullopt = unrecalled / not evaluated
};

struct TransferReport {
    std::size_t n_requested = 0;
    std::size_t n_generated = 0;
    double mlp_fooled_fraction = 0.0;
    double hopfield_fooled_fraction = 0.0;
    double unrecalled_fraction = 0.0;
    std::vector<AdversarialRecord> records;
};

// x' = clip_[0,1](x + eps * sign(d rms_loss / d x)), sign(0) -> 0.
GrayImage fgsm(const Mlp& m, const GrayImage& img, double epsilon);

// Scans the seeded-shuffled data for images the model classifies correctly,
// perturbs them with fgsm, and keeps only successful attacks
// (adversarial label != true label). May return fewer than n.
std::vector<AdversarialRecord> generate_adversarial_set(const Mlp& m,
                                                        const std::vector<GrayImage>& data,
                                                        std::size_t n, double epsilon,
                                                        std::uint64_t seed);

struct TransferOptions {
    std::uint64_t seed = 0;           // recall visit-order seed
    std::size_t max_sweeps = 0;       // 0 means 10*N
    double binarize_threshold = 0.5;
    std::size_t n_requested = 0;      // 0 means records.size()
};

// Binarizes each perturbed image and recalls it through the net.
// "Fooled" means a definite wrong label; "unrecalled" is counted separately.
TransferReport transfer_experiment(std::vector<AdversarialRecord> records,
                                   const HopfieldNet& net, const PatternSet& prototypes,
                                   std::size_t reject_threshold,
                                   const TransferOptions& opts = {});

// JSON report (images omitted; use dump_records_idx for the pixels).
void write_transfer_report_json(const TransferReport& report, const std::string& path);

// Perturbed images as an IDX pair for external viewing.
void dump_records_idx(const std::vector<AdversarialRecord>& records,
                      std::size_t rows, std::size_t cols,
                      const std::string& images_path, const std::string& labels_path);

}  // namespace wsc
