#include "wsc/hopfield.hpp"

#include <cstring>
#include <limits>
#include <memory>
#include <string>

#include "wsc/io.hpp"
#include "wsc/kernels.hpp"
#include "wsc/rng.hpp"

namespace wsc {

namespace {

constexpr char kNetMagic[8] = {'W', 'S', 'C', 'H', 'O', 'P', '0', '1'};
constexpr char kPatternMagic[8] = {'W', 'S', 'C', 'P', 'A', 'T', '0', '1'};

void check_dim(const HopfieldNet& net, const BipolarPattern& s, const char* what) {
    if (s.size() != net.dim()) {
        throw DimensionMismatch(std::string(what) + ": pattern dimension " +
                                std::to_string(s.size()) + " != net dimension " +
                                std::to_string(net.dim()));
    }
}

}  // namespace

HopfieldNet::HopfieldNet(Matrix weights) : weights_(std::move(weights)) {
    if (weights_.rows != weights_.cols) {
        throw DimensionMismatch("weight matrix must be square");
    }
    for (std::size_t i = 0; i < weights_.rows; ++i) {
        if (weights_.at(i, i) != 0.0) throw InvalidArgument("weight diagonal must be zero");
        for (std::size_t j = i + 1; j < weights_.cols; ++j) {
            if (weights_.at(i, j) != weights_.at(j, i)) {
                throw InvalidArgument("weight matrix must be symmetric");
            }
        }
    }
}

void HopfieldNet::add_symmetric_row_update(std::size_t k, double delta,
                                           const BipolarPattern& xi) {
    const std::size_t n = dim();
    kernels::axpy(delta * xi[k], xi.data(), weights_.row(k), n);
    weights_.at(k, k) = 0.0;
    for (std::size_t j = 0; j < n; ++j) weights_.at(j, k) = weights_.at(k, j);
}

HopfieldNet hebbian_weights(const PatternSet& ps) {
    ps.validate();
    const std::size_t n = ps.dim();
    Matrix w(n, n);
    for (const auto& xi : ps.patterns) {
        kernels::rank1_update(w.data.data(), n, n, 1.0, xi.data(), xi.data());
    }
    kernels::scale(1.0 / static_cast<double>(n), w.data.data(), w.data.size());
    for (std::size_t i = 0; i < n; ++i) w.at(i, i) = 0.0;
    return HopfieldNet(std::move(w));
}

double energy(const HopfieldNet& net, const BipolarPattern& s) {
    check_dim(net, s, "energy");
    const std::size_t n = net.dim();
    std::vector<double> h(n);
    kernels::matvec(net.weights().data.data(), n, n, s.data(), h.data());
    return -0.5 * kernels::dot(s.data(), h.data(), n);
}

double local_field(const HopfieldNet& net, const BipolarPattern& s, std::size_t i) {
    check_dim(net, s, "local_field");
    if (i >= net.dim()) throw InvalidArgument("local_field: index out of range");
    return kernels::dot(net.weights().row(i), s.data(), net.dim());
}

RecallResult recall_with_orders(const HopfieldNet& net, const BipolarPattern& probe,
                                std::size_t max_sweeps, const SweepOrderFn& order_fn,
                                const FlipObserver& observer) {
    check_dim(net, probe, "recall");
    if (max_sweeps < 1) throw InvalidArgument("recall: max_sweeps must be >= 1");

    const std::size_t n = net.dim();
    std::vector<double> state = probe.bits();

    RecallResult res;
    res.energy_trace.push_back(energy(net, BipolarPattern(state)));
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        const std::vector<std::size_t> order = order_fn(sweep);
        std::size_t flips = 0;
        for (std::size_t i : order) {
            const double h = kernels::dot(net.weights().row(i), state.data(), n);
            if (h == 0.0) continue;  // zero field keeps the current bit
            const double want = h > 0.0 ? 1.0 : -1.0;
            if (state[i] != want) {
                if (observer) observer(i, 2.0 * state[i] * h);
                state[i] = want;
                ++flips;
            }
        }
        ++res.sweeps_used;
        res.energy_trace.push_back(energy(net, BipolarPattern(state)));
        if (flips == 0) {
            res.converged = true;
            break;
        }
    }
    res.final_state = BipolarPattern(std::move(state));
    return res;
}

RecallResult recall(const HopfieldNet& net, const BipolarPattern& probe,
                    std::size_t max_sweeps, std::uint64_t seed,
                    const FlipObserver& observer) {
    auto rng = std::make_shared<Rng>(seed);
    const std::size_t n = net.dim();
    return recall_with_orders(
        net, probe, max_sweeps,
        [rng, n](std::size_t) { return rng->permutation(n); }, observer);
}

bool is_stable(const HopfieldNet& net, const BipolarPattern& p) {
    check_dim(net, p, "is_stable");
    const std::size_t n = net.dim();
    for (std::size_t i = 0; i < n; ++i) {
        const double h = kernels::dot(net.weights().row(i), p.data(), n);
        if (p[i] * h <= 0.0) return false;
    }
    return true;
}

std::size_t count_stable(const HopfieldNet& net, const PatternSet& ps) {
    std::size_t c = 0;
    for (const auto& p : ps.patterns) {
        if (is_stable(net, p)) ++c;
    }
    return c;
}

IterTrainResult iterative_train(const PatternSet& ps, const IterTrainConfig& cfg) {
    ps.validate();
    if (cfg.learning_rate <= 0.0) throw InvalidArgument("learning rate must be positive");
    if (cfg.max_iters == 0) throw InvalidArgument("max_iters must be positive");

    const std::size_t n = ps.dim();
    const std::size_t neighbors =
        cfg.neighbors_per_pattern == 0 ? n : cfg.neighbors_per_pattern;

    IterTrainResult res;
    res.net = hebbian_weights(ps);
    res.stable_before = count_stable(res.net, ps);

    Rng rng(cfg.seed);
    const double step = 2.0 * cfg.learning_rate / static_cast<double>(n);

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        if (count_stable(res.net, ps) == ps.count()) break;
        std::size_t violations = 0;
        for (const auto& xi : ps.patterns) {
            for (std::size_t d = 0; d < neighbors; ++d) {
                const std::size_t k = rng.below(n);
                // Neighbor xi' flips bit k; E(xi') - E(xi) = 2 xi_k h_k, so the
                // neighbor fails to be strictly higher exactly when xi_k h_k <= 0.
                const double h_k = kernels::dot(res.net.weights().row(k), xi.data(), n);
                if (xi[k] * h_k <= 0.0) {
                    // (eta/N)(xi xi^T - xi' xi'^T) is zero except in row/column k,
                    // where it equals (2 eta / N) xi_k xi_j.
                    res.net.add_symmetric_row_update(k, step, xi);
                    ++violations;
                }
            }
        }
        res.log.push_back(IterTrainLogEntry{iter, violations, count_stable(res.net, ps)});
    }
    res.stable_after = count_stable(res.net, ps);
    return res;
}

RecallClassifyResult recall_classify(const HopfieldNet& net, const PatternSet& prototypes,
                                     const BipolarPattern& probe,
                                     const RecallClassifyOptions& opts) {
    prototypes.validate();
    if (!prototypes.labeled()) throw InvalidArgument("recall_classify needs labeled prototypes");
    check_dim(net, probe, "recall_classify");
    if (prototypes.dim() != net.dim()) {
        throw DimensionMismatch("prototype dimension does not match net");
    }

    const std::size_t n = net.dim();
    const std::size_t max_sweeps = opts.max_sweeps == 0 ? 10 * n : opts.max_sweeps;
    const std::size_t reject = opts.reject_threshold == 0 ? n / 4 : opts.reject_threshold;

    RecallResult rr = recall(net, probe, max_sweeps, opts.seed);

    RecallClassifyResult out;
    out.fixed_point = rr.final_state;
    out.converged = rr.converged;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < prototypes.count(); ++i) {
        const std::size_t d = hamming(rr.final_state, prototypes.patterns[i]);
        if (d < best) {  // ties keep the lowest prototype index
            best = d;
            out.nearest_prototype = i;
        }
    }
    out.nearest_distance = best;
    if (best <= reject) out.label = prototypes.labels[out.nearest_prototype];
    return out;
}

void save_hopfield(const HopfieldNet& net, const std::string& path) {
    std::ofstream os = open_out(path);
    os.write(kNetMagic, 8);
    const std::size_t n = net.dim();
    write_u32(os, static_cast<std::uint32_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) write_f64(os, net.weight(i, j));
    }
    if (!os) throw IoError("write failed: " + path);
}

HopfieldNet load_hopfield(const std::string& path) {
    std::ifstream is = open_in(path);
    char magic[8];
    is.read(magic, 8);
    if (is.gcount() != 8 || std::memcmp(magic, kNetMagic, 8) != 0) {
        throw FormatError("not a hopfield net file: " + path);
    }
    const std::uint32_t n = read_u32(is);
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = read_f64(is);
            w.at(i, j) = v;
            w.at(j, i) = v;
        }
    }
    return HopfieldNet(std::move(w));
}

void save_pattern_set(const PatternSet& ps, const std::string& path) {
    ps.validate();
    std::ofstream os = open_out(path);
    os.write(kPatternMagic, 8);
    write_u32(os, static_cast<std::uint32_t>(ps.count()));
    write_u32(os, static_cast<std::uint32_t>(ps.dim()));
    write_u8(os, ps.labeled() ? 1 : 0);
    if (ps.labeled()) {
        for (int l : ps.labels) write_i32(os, l);
    }
    for (const auto& p : ps.patterns) {
        for (std::size_t i = 0; i < p.size(); ++i) write_u8(os, p[i] > 0.0 ? 1 : 0);
    }
    if (!os) throw IoError("write failed: " + path);
}

PatternSet load_pattern_set(const std::string& path) {
    std::ifstream is = open_in(path);
    char magic[8];
    is.read(magic, 8);
    if (is.gcount() != 8 || std::memcmp(magic, kPatternMagic, 8) != 0) {
        throw FormatError("not a pattern set file: " + path);
    }
    const std::uint32_t count = read_u32(is);
    const std::uint32_t dim = read_u32(is);
    const std::uint8_t labeled = read_u8(is);
    PatternSet ps;
    if (labeled != 0) {
        ps.labels.resize(count);
        for (auto& l : ps.labels) l = read_i32(is);
    }
    for (std::uint32_t k = 0; k < count; ++k) {
        std::vector<double> bits(dim);
        for (auto& b : bits) b = read_u8(is) != 0 ? 1.0 : -1.0;
        ps.patterns.emplace_back(std::move(bits));
    }
    ps.validate();
    return ps;
}

void write_iter_log_csv(const std::vector<IterTrainLogEntry>& log, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "iteration,violations,stable_count\n";
    for (const auto& e : log) {
        os << e.iteration << ',' << e.violations << ',' << e.stable_count << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace wsc
