#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsc/hopfield.hpp"
#include "wsc/mlp.hpp"
#include "wsc/patterns.hpp"

namespace wsc {

// Sign-flip / permutation of one hidden layer's units. Applying it leaves
// the network function unchanged when the hidden activation is odd (tanh):
// flips negate row u of layer k and column u of layer k+1, then the
// permutation reorders rows of layer k (with biases) and columns of
// layer k+1. permutation[i] = j means new unit i takes old unit j.
struct EquioutputTransform {
    std::size_t layer_index = 0;          // hidden layer: 0 .. n_layers-2
    std::vector<std::size_t> permutation;
    std::vector<std::uint8_t> sign_flips;  // one flag per unit

    static EquioutputTransform identity(std::size_t layer_index, std::size_t units);
};

Mlp apply_transform(const Mlp& m, const EquioutputTransform& t);

// Transform equal to "apply first, then second" on the same layer.
// apply(apply(m, first), second) == apply(m, compose(second, first)) exactly.
EquioutputTransform compose(const EquioutputTransform& second,
                            const EquioutputTransform& first);

// All n! * 2^n transforms of a hidden layer, in a fixed deterministic order.
std::vector<EquioutputTransform> enumerate_layer_transforms(std::size_t layer_index,
                                                            std::size_t units);

// max over probes and output components of |forward(a,x) - forward(b,x)| <= tol
bool equioutput_check(const Mlp& a, const Mlp& b,
                      const std::vector<std::vector<double>>& probes, double tol);

// Seeded probes uniform in [-1,1]^dim.
std::vector<std::vector<double>> make_probes(std::size_t count, std::size_t dim,
                                             std::uint64_t seed);

// prod over hidden layers of n_k! * 2^{n_k}. Throws OverflowError when the
// exact count does not fit 64 bits.
std::uint64_t replica_count(const std::vector<std::size_t>& hidden_sizes);

// ---- order of ascendance ----------------------------------------------

struct AscendanceTrace {
    // ranks[e][j] = rank (ascending, ties by index) of weight j after e epochs;
    // entry 0 is the initialization snapshot.
    std::vector<std::vector<std::uint32_t>> ranks;
    std::vector<std::uint8_t> order_preserved;  // vs. entry 0
    std::vector<double> kendall_tau;            // vs. entry 0
};

// Kendall tau-a between the initial ordering and the current values:
// items are taken in initial-rank order and inversions of the current
// values are counted (O(n log n)).
double kendall_tau_vs_initial(const std::vector<std::uint32_t>& initial_ranks,
                              const std::vector<double>& current_values);

// Records the designated layer's weight ordering at init and after each
// epoch; install hook() into mlp::train. Reports, never asserts.
class AscendanceRecorder {
public:
    AscendanceRecorder(const Mlp& m, std::size_t layer_index);

    EpochHook hook();
    const AscendanceTrace& trace() const { return trace_; }

private:
    void snapshot(const Mlp& m);

    std::size_t layer_index_;
    std::vector<std::uint32_t> initial_ranks_;
    AscendanceTrace trace_;
};

// CSV: epoch,order_preserved,kendall_tau
void write_ascendance_csv(const AscendanceTrace& trace, const std::string& path);

// ---- pattern-space partition -------------------------------------------

struct PartitionReport {
    std::size_t trained = 0;        // P_t
    std::size_t generalized = 0;    // P_g
    std::size_t adversarial = 0;    // P_a
    std::size_t irrelevant = 0;     // P_r
    std::size_t total = 0;          // P_u == 2^n
    // Per-pattern category indexed by PatternSpace order, when requested:
    // 0=trained 1=generalized 2=adversarial 3=irrelevant.
    std::vector<std::uint8_t> per_pattern;
};

// Total labeling of an enumerable space: entry k labels PatternSpace::at(k);
// nullopt means "irrelevant".
using OracleLabeling = std::vector<std::optional<int>>;

// Exact four-way partition of the 2^n pattern space:
//   P_t: in train_set and predicted correctly,
//   P_g: not in train_set, oracle class c, predicted c,
//   P_a: oracle class c, mispredicted, and within adversarial_radius
//        (Hamming) of another class-c oracle pattern,
//   P_r: everything else.
PartitionReport partition_space(const Mlp& m, const PatternSet& train_set,
                                const OracleLabeling& oracle_labels,
                                std::size_t adversarial_radius,
                                bool keep_per_pattern = false,
                                std::size_t threads = 1);

void write_partition_report_json(const PartitionReport& report, const std::string& path);

// Deterministic toy problem on an enumerable space: class seed patterns,
// a Hamming-ball oracle around each seed (ambiguous or uncovered patterns
// are irrelevant), and a labeled train set drawn from the covered patterns.
struct ToySpace {
    std::size_t n = 0;
    PatternSet train;
    OracleLabeling oracle;
    std::vector<BipolarPattern> class_seeds;
};

ToySpace make_toy_space(std::size_t n, std::size_t n_classes, std::size_t oracle_radius,
                        double train_fraction, std::uint64_t seed);

// ---- Hopfield probe ------------------------------------------------------

// Raw row/column operation on a Hopfield weight matrix:
// W'(i,j) = row_signs[i] * col_signs[j] * W(perm[i], perm[j]).
// Only transforms that keep W symmetric are accepted.
struct HopfieldTransform {
    std::string name;
    std::vector<std::size_t> permutation;
    std::vector<std::int8_t> row_signs;   // +-1
    std::vector<std::int8_t> col_signs;   // +-1
    // When true, probes and visit orders are mapped through the transform
    // and fixed points are compared after mapping back (the exact
    // relabeling protocol). When false, the transformed net sees the same
    // probes and visit orders as the original.
    bool transform_probes = false;

    static HopfieldTransform identity(std::size_t n);
    static HopfieldTransform relabeling(std::string name, std::vector<std::size_t> perm,
                                        std::vector<std::int8_t> signs,
                                        bool transform_probes);
};

struct HopfieldProbeEntry {
    std::string name;
    bool accepted = false;       // false: result violates the net invariants
    double agreement = 0.0;      // fraction of probes with matching fixed points
    std::size_t n_probes = 0;
};

struct HopfieldProbeReport {
    std::vector<HopfieldProbeEntry> entries;
};

HopfieldProbeReport hopfield_equioutput_probe(const HopfieldNet& net,
                                              const std::vector<HopfieldTransform>& transforms,
                                              const std::vector<BipolarPattern>& probes,
                                              std::size_t max_sweeps, std::uint64_t seed);

void write_probe_report_json(const HopfieldProbeReport& report, const std::string& path);

}  // namespace wsc
