#include "wsc/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "wsc/idx.hpp"
#include "wsc/io.hpp"
#include "wsc/rng.hpp"

namespace wsc {

GrayImage fgsm(const Mlp& m, const GrayImage& img, double epsilon) {
    if (epsilon < 0.0) throw InvalidArgument("fgsm: epsilon must be nonnegative");
    const auto target = one_hot(img.label, m.output_dim());
    const auto g = input_gradient(m, img.pixels, target);

    GrayImage out = img;
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        double step = 0.0;
        if (g[i] > 0.0) step = epsilon;
        else if (g[i] < 0.0) step = -epsilon;  // sign(0) leaves the pixel alone
        double p = img.pixels[i] + step;
        if (p < 0.0) p = 0.0;
        if (p > 1.0) p = 1.0;
        out.pixels[i] = p;
    }
    return out;
}

std::vector<AdversarialRecord> generate_adversarial_set(const Mlp& m,
                                                        const std::vector<GrayImage>& data,
                                                        std::size_t n, double epsilon,
                                                        std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("generate_adversarial_set: n must be >= 1");

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<AdversarialRecord> records;
    for (std::size_t idx : order) {
        if (records.size() >= n) break;
        const GrayImage& img = data[idx];
        const int clean = predict(m, img);
        if (clean != img.label) continue;  // attack only previously-recognized images
        GrayImage adv = fgsm(m, img, epsilon);
        const int adv_label = predict(m, adv);
        if (adv_label == img.label) continue;  // keep successful attacks only

        AdversarialRecord rec;
        rec.original = img;
        rec.perturbed = std::move(adv);
        rec.epsilon = epsilon;
        rec.true_label = img.label;
        rec.mlp_label_clean = clean;
        rec.mlp_label_adv = adv_label;
        records.push_back(std::move(rec));
    }
    return records;
}

TransferReport transfer_experiment(std::vector<AdversarialRecord> records,
                                   const HopfieldNet& net, const PatternSet& prototypes,
                                   std::size_t reject_threshold,
                                   const TransferOptions& opts) {
    if (records.empty()) throw InvalidArgument("transfer_experiment: no records");
    prototypes.validate();
    if (!prototypes.labeled()) {
        throw InvalidArgument("transfer_experiment: prototypes must be labeled");
    }

    TransferReport report;
    report.n_generated = records.size();
    report.n_requested = opts.n_requested == 0 ? records.size() : opts.n_requested;

    std::size_t mlp_fooled = 0;
    std::size_t hop_fooled = 0;
    std::size_t unrecalled = 0;
    for (std::size_t r = 0; r < records.size(); ++r) {
        auto& rec = records[r];
        if (rec.mlp_label_adv != rec.true_label) ++mlp_fooled;

        const BipolarPattern probe = binarize(rec.perturbed, opts.binarize_threshold);
        RecallClassifyOptions rco;
        rco.max_sweeps = opts.max_sweeps;
        rco.seed = mix64(opts.seed ^ (r + 1));
        rco.reject_threshold = reject_threshold;
        const RecallClassifyResult rc = recall_classify(net, prototypes, probe, rco);
        rec.hopfield_label_adv = rc.label;
        if (!rc.label.has_value()) {
            ++unrecalled;  // reported separately, never counted as fooled
        } else if (*rc.label != rec.true_label) {
            ++hop_fooled;
        }
    }
    const double inv = 1.0 / static_cast<double>(records.size());
    report.mlp_fooled_fraction = mlp_fooled * inv;
    report.hopfield_fooled_fraction = hop_fooled * inv;
    report.unrecalled_fraction = unrecalled * inv;
    report.records = std::move(records);
    return report;
}

void write_transfer_report_json(const TransferReport& report, const std::string& path) {
    nlohmann::json j;
    j["n_requested"] = report.n_requested;
    j["n_generated"] = report.n_generated;
    j["mlp_fooled_fraction"] = report.mlp_fooled_fraction;
    j["hopfield_fooled_fraction"] = report.hopfield_fooled_fraction;
    j["unrecalled_fraction"] = report.unrecalled_fraction;
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& rec : report.records) {
        double linf = 0.0;
        for (std::size_t i = 0; i < rec.original.pixels.size(); ++i) {
            linf = std::max(linf, std::abs(rec.perturbed.pixels[i] - rec.original.pixels[i]));
        }
        nlohmann::json r;
        r["true_label"] = rec.true_label;
        r["mlp_label_clean"] = rec.mlp_label_clean;
        r["mlp_label_adv"] = rec.mlp_label_adv;
        if (rec.hopfield_label_adv.has_value()) {
            r["hopfield_label_adv"] = *rec.hopfield_label_adv;
        } else {
            r["hopfield_label_adv"] = nullptr;
        }
        r["epsilon"] = rec.epsilon;
        r["linf"] = linf;
        recs.push_back(std::move(r));
    }
    j["records"] = std::move(recs);
    write_file_bytes(path, j.dump(2) + "\n");
}

void dump_records_idx(const std::vector<AdversarialRecord>& records,
                      std::size_t rows, std::size_t cols,
                      const std::string& images_path, const std::string& labels_path) {
    std::vector<GrayImage> images;
    images.reserve(records.size());
    for (const auto& rec : records) {
        GrayImage g = rec.perturbed;
        g.label = rec.true_label;
        images.push_back(std::move(g));
    }
    save_idx(images, rows, cols, images_path, labels_path);
}

}  // namespace wsc
