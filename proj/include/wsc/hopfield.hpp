#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wsc/matrix.hpp"
#include "wsc/patterns.hpp"

namespace wsc {

// Symmetric zero-diagonal weight matrix. Symmetry and the zero diagonal are
// enforced by construction; every public operation preserves them exactly.
class HopfieldNet {
public:
    HopfieldNet() = default;

    // Validates symmetry (exact) and zero diagonal (exact).
    explicit HopfieldNet(Matrix weights);

    std::size_t dim() const { return weights_.rows; }
    const Matrix& weights() const { return weights_; }
    double weight(std::size_t i, std::size_t j) const { return weights_.at(i, j); }

    // In-place symmetric rank-1 style row/column update used by the
    // iterative rule: W[k][j] += delta * xi_k * xi_j for j != k, mirrored
    // into column k. Keeps the diagonal at zero.
    void add_symmetric_row_update(std::size_t k, double delta, const BipolarPattern& xi);

private:
    Matrix weights_;
};

struct RecallResult {
    BipolarPattern final_state;
    std::size_t sweeps_used = 0;
    bool converged = false;
    std::vector<double> energy_trace;  // initial energy, then one entry per sweep
};

struct IterTrainConfig {
    double learning_rate = 0.1;
    std::size_t max_iters = 1000;
    std::size_t neighbors_per_pattern = 0;  // 0 means N (one expected draw per bit)
    std::uint64_t seed = 1;
};

struct IterTrainLogEntry {
    std::size_t iteration = 0;
    std::size_t violations = 0;
    std::size_t stable_count = 0;
};

struct IterTrainResult {
    HopfieldNet net;
    std::vector<IterTrainLogEntry> log;
    std::size_t stable_before = 0;
    std::size_t stable_after = 0;
};

// W_ij = (1/N) sum_mu xi_i^mu xi_j^mu for i != j, zero diagonal.
HopfieldNet hebbian_weights(const PatternSet& ps);

// E = -1/2 sum_ij W_ij s_i s_j
double energy(const HopfieldNet& net, const BipolarPattern& s);

// h_i = sum_j W_ij s_j. Flipping bit i changes the energy by 2 s_i h_i.
double local_field(const HopfieldNet& net, const BipolarPattern& s, std::size_t i);

// Observes each accepted flip: (unit index, energy change). Used by tests.
using FlipObserver = std::function<void(std::size_t index, double delta_e)>;

// Produces the visit order for sweep number `sweep`.
using SweepOrderFn = std::function<std::vector<std::size_t>(std::size_t sweep)>;

// Asynchronous recall: each sweep visits all units in a fresh seeded random
// permutation and sets s_i to sign(h_i), keeping s_i when h_i == 0. Stops at
// the first flip-free sweep (converged) or after max_sweeps.
RecallResult recall(const HopfieldNet& net, const BipolarPattern& probe,
                    std::size_t max_sweeps, std::uint64_t seed,
                    const FlipObserver& observer = {});

// Recall with caller-controlled visit orders (probe/relabeling experiments).
RecallResult recall_with_orders(const HopfieldNet& net, const BipolarPattern& probe,
                                std::size_t max_sweeps, const SweepOrderFn& order_fn,
                                const FlipObserver& observer = {});

// True iff p_i * h_i > 0 for every i (strict single-flip local minimum).
bool is_stable(const HopfieldNet& net, const BipolarPattern& p);

std::size_t count_stable(const HopfieldNet& net, const PatternSet& ps);

// Hebbian init, then per iteration: for each stored pattern draw random
// 1-bit-flip neighbors; every neighbor that fails to be strictly higher in
// energy triggers the correction dW = (eta/N)(xi xi^T - xi' xi'^T) on the
// off-diagonal entries. Stops early once every stored pattern is stable.
IterTrainResult iterative_train(const PatternSet& ps, const IterTrainConfig& cfg);

struct RecallClassifyOptions {
    std::size_t max_sweeps = 0;        // 0 means 10*N
    std::uint64_t seed = 0;
    std::size_t reject_threshold = 0;  // Hamming; 0 means N/4
};

struct RecallClassifyResult {
    std::optional<int> label;  // nullopt = "unrecalled"
    BipolarPattern fixed_point;
    std::size_t nearest_prototype = 0;
    std::size_t nearest_distance = 0;
    bool converged = false;
};

// Runs recall, then labels by the Hamming-nearest stored prototype
// (ties to the lowest prototype index); "unrecalled" when the nearest
// distance exceeds the reject threshold.
RecallClassifyResult recall_classify(const HopfieldNet& net, const PatternSet& prototypes,
                                     const BipolarPattern& probe,
                                     const RecallClassifyOptions& opts = {});

// Serialization: dimension + row-major upper triangle, lossless round-trip.
void save_hopfield(const HopfieldNet& net, const std::string& path);
HopfieldNet load_hopfield(const std::string& path);

void save_pattern_set(const PatternSet& ps, const std::string& path);
PatternSet load_pattern_set(const std::string& path);

// CSV: iteration,violations,stable_count
void write_iter_log_csv(const std::vector<IterTrainLogEntry>& log, const std::string& path);

}  // namespace wsc
