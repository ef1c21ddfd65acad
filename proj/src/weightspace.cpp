#include "wsc/weightspace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "wsc/io.hpp"
#include "wsc/rng.hpp"

namespace wsc {

namespace {

void check_transform(const Mlp& m, const EquioutputTransform& t) {
    if (m.layers.size() < 2 || t.layer_index + 1 >= m.layers.size()) {
        throw InvalidArgument("transform layer index does not address a hidden layer");
    }
    if (m.layers[t.layer_index].activation != Activation::tanh_act) {
        throw InvalidArgument("equioutput transforms require an odd hidden activation");
    }
    const std::size_t units = m.layers[t.layer_index].fan_out();
    if (t.permutation.size() != units || t.sign_flips.size() != units) {
        throw InvalidArgument("transform size does not match the layer");
    }
    std::vector<bool> seen(units, false);
    for (std::size_t j : t.permutation) {
        if (j >= units || seen[j]) throw InvalidArgument("transform permutation is not a bijection");
        seen[j] = true;
    }
}

std::vector<std::size_t> invert_permutation(const std::vector<std::size_t>& p) {
    std::vector<std::size_t> inv(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = i;
    return inv;
}

// Merge-sort inversion count; pairs with equal values are not inversions.
std::size_t count_inversions(std::vector<double>& v, std::vector<double>& tmp,
                             std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::size_t inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
    std::size_t a = lo;
    std::size_t b = mid;
    std::size_t o = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            inv += mid - a;
            tmp[o++] = v[b++];
        } else {
            tmp[o++] = v[a++];
        }
    }
    while (a < mid) tmp[o++] = v[a++];
    while (b < hi) tmp[o++] = v[b++];
    std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
              tmp.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

std::vector<std::uint32_t> ranks_of(const std::vector<double>& values) {
    std::vector<std::uint32_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;  // ties by index keep the ranking total
    });
    std::vector<std::uint32_t> ranks(values.size());
    for (std::uint32_t r = 0; r < idx.size(); ++r) ranks[idx[r]] = r;
    return ranks;
}

std::vector<double> layer_weight_values(const Mlp& m, std::size_t layer_index) {
    if (layer_index >= m.layers.size()) throw InvalidArgument("no such layer");
    return m.layers[layer_index].weights.data;
}

// All bit masks of popcount 1..radius over n bits.
std::vector<std::uint32_t> ball_masks(std::size_t n, std::size_t radius) {
    std::vector<std::uint32_t> masks;
    std::vector<std::size_t> pick;
    auto rec = [&](auto&& self, std::size_t start, std::size_t left) -> void {
        if (left == 0) {
            std::uint32_t mask = 0;
            for (std::size_t b : pick) mask |= (1u << b);
            masks.push_back(mask);
            return;
        }
        for (std::size_t b = start; b + left <= n; ++b) {
            pick.push_back(b);
            self(self, b + 1, left - 1);
            pick.pop_back();
        }
    };
    for (std::size_t d = 1; d <= radius && d <= n; ++d) rec(rec, 0, d);
    return masks;
}

}  // namespace

EquioutputTransform EquioutputTransform::identity(std::size_t layer_index, std::size_t units) {
    EquioutputTransform t;
    t.layer_index = layer_index;
    t.permutation.resize(units);
    std::iota(t.permutation.begin(), t.permutation.end(), std::size_t{0});
    t.sign_flips.assign(units, 0);
    return t;
}

Mlp apply_transform(const Mlp& m, const EquioutputTransform& t) {
    check_transform(m, t);
    Mlp out = m;
    DenseLayer& lk = out.layers[t.layer_index];
    DenseLayer& lnext = out.layers[t.layer_index + 1];
    const std::size_t units = lk.fan_out();

    // Sign flips: negate row u of layer k (with bias) and column u of layer k+1.
    for (std::size_t u = 0; u < units; ++u) {
        if (t.sign_flips[u] == 0) continue;
        double* row = lk.weights.row(u);
        for (std::size_t c = 0; c < lk.fan_in(); ++c) row[c] = -row[c];
        lk.bias[u] = -lk.bias[u];
        for (std::size_t r = 0; r < lnext.fan_out(); ++r) {
            lnext.weights.at(r, u) = -lnext.weights.at(r, u);
        }
    }

    // Permutation: new unit i takes old unit permutation[i].
    Matrix wk = lk.weights;
    std::vector<double> bk = lk.bias;
    Matrix wn = lnext.weights;
    for (std::size_t i = 0; i < units; ++i) {
        const std::size_t j = t.permutation[i];
        std::copy(wk.row(j), wk.row(j) + wk.cols, lk.weights.row(i));
        lk.bias[i] = bk[j];
        for (std::size_t r = 0; r < lnext.fan_out(); ++r) {
            lnext.weights.at(r, i) = wn.at(r, j);
        }
    }
    return out;
}

EquioutputTransform compose(const EquioutputTransform& second,
                            const EquioutputTransform& first) {
    if (second.layer_index != first.layer_index ||
        second.permutation.size() != first.permutation.size()) {
        throw InvalidArgument("compose: transforms act on different layers");
    }
    const std::size_t units = first.permutation.size();
    EquioutputTransform t;
    t.layer_index = first.layer_index;
    t.permutation.resize(units);
    t.sign_flips.assign(units, 0);
    const auto first_inv = invert_permutation(first.permutation);
    for (std::size_t i = 0; i < units; ++i) {
        t.permutation[i] = first.permutation[second.permutation[i]];
    }
    // Unit u is flipped by `first` directly and by `second` at its
    // post-permutation position first_inv[u].
    for (std::size_t u = 0; u < units; ++u) {
        t.sign_flips[u] = static_cast<std::uint8_t>(first.sign_flips[u] ^
                                                    second.sign_flips[first_inv[u]]);
    }
    return t;
}

std::vector<EquioutputTransform> enumerate_layer_transforms(std::size_t layer_index,
                                                            std::size_t units) {
    std::vector<std::size_t> perm(units);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<EquioutputTransform> out;
    do {
        for (std::size_t mask = 0; mask < (std::size_t{1} << units); ++mask) {
            EquioutputTransform t;
            t.layer_index = layer_index;
            t.permutation = perm;
            t.sign_flips.resize(units);
            for (std::size_t u = 0; u < units; ++u) {
                t.sign_flips[u] = static_cast<std::uint8_t>((mask >> u) & 1u);
            }
            out.push_back(std::move(t));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

bool equioutput_check(const Mlp& a, const Mlp& b,
                      const std::vector<std::vector<double>>& probes, double tol) {
    if (a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim()) {
        throw DimensionMismatch("equioutput_check: network shapes differ");
    }
    for (const auto& x : probes) {
        const auto ya = forward(a, x);
        const auto yb = forward(b, x);
        for (std::size_t i = 0; i < ya.size(); ++i) {
            if (std::abs(ya[i] - yb[i]) > tol) return false;
        }
    }
    return true;
}

std::vector<std::vector<double>> make_probes(std::size_t count, std::size_t dim,
                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> probes(count);
    for (auto& p : probes) {
        p.resize(dim);
        for (double& x : p) x = rng.uniform(-1.0, 1.0);
    }
    return probes;
}

std::uint64_t replica_count(const std::vector<std::size_t>& hidden_sizes) {
    auto checked_mul = [](std::uint64_t a, std::uint64_t b) {
        if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b) {
            throw OverflowError("replica count exceeds 64 bits");
        }
        return a * b;
    };
    std::uint64_t total = 1;
    for (std::size_t n : hidden_sizes) {
        if (n == 0) throw InvalidArgument("hidden sizes must be positive");
        std::uint64_t group = 1;
        for (std::uint64_t k = 2; k <= n; ++k) group = checked_mul(group, k);  // n!
        for (std::size_t k = 0; k < n; ++k) group = checked_mul(group, 2);     // 2^n
        total = checked_mul(total, group);
    }
    return total;
}

double kendall_tau_vs_initial(const std::vector<std::uint32_t>& initial_ranks,
                              const std::vector<double>& current_values) {
    const std::size_t n = initial_ranks.size();
    if (current_values.size() != n) {
        throw DimensionMismatch("kendall_tau: rank/value sizes differ");
    }
    if (n < 2) return 1.0;
    // Items in initial-rank order; discordant pairs are inversions of the
    // current values in that order.
    std::vector<double> seq(n);
    for (std::size_t j = 0; j < n; ++j) seq[initial_ranks[j]] = current_values[j];
    std::vector<double> tmp(n);
    const std::size_t inv = count_inversions(seq, tmp, 0, n);
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return 1.0 - static_cast<double>(inv) / pairs * 2.0;
}

AscendanceRecorder::AscendanceRecorder(const Mlp& m, std::size_t layer_index)
    : layer_index_(layer_index) {
    initial_ranks_ = ranks_of(layer_weight_values(m, layer_index));
    snapshot(m);
}

void AscendanceRecorder::snapshot(const Mlp& m) {
    const auto values = layer_weight_values(m, layer_index_);
    trace_.ranks.push_back(ranks_of(values));
    const double tau = kendall_tau_vs_initial(initial_ranks_, values);
    trace_.kendall_tau.push_back(tau);
    trace_.order_preserved.push_back(tau == 1.0 ? 1 : 0);
}

EpochHook AscendanceRecorder::hook() {
    return [this](std::size_t, const Mlp& m) { snapshot(m); };
}

void write_ascendance_csv(const AscendanceTrace& trace, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "epoch,order_preserved,kendall_tau\n";
    for (std::size_t e = 0; e < trace.kendall_tau.size(); ++e) {
        os << e << ',' << static_cast<int>(trace.order_preserved[e]) << ','
           << format_double(trace.kendall_tau[e]) << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

PartitionReport partition_space(const Mlp& m, const PatternSet& train_set,
                                const OracleLabeling& oracle_labels,
                                std::size_t adversarial_radius,
                                bool keep_per_pattern, std::size_t threads) {
    train_set.validate();
    if (!train_set.labeled()) throw InvalidArgument("partition_space: train set must be labeled");
    const std::size_t n = train_set.dim();
    PatternSpace space(n);
    if (oracle_labels.size() != space.size()) {
        throw InvalidArgument("oracle labeling must cover the whole space");
    }
    if (m.input_dim() != n) throw DimensionMismatch("model input does not match pattern space");

    std::unordered_map<std::size_t, int> train_by_index;
    for (std::size_t i = 0; i < train_set.count(); ++i) {
        train_by_index.emplace(space.index_of(train_set.patterns[i]), train_set.labels[i]);
    }

    const auto masks = ball_masks(n, adversarial_radius);
    auto has_class_neighbor = [&](std::size_t k, int c) {
        for (std::uint32_t mask : masks) {
            const std::size_t other = k ^ mask;
            const auto& lbl = oracle_labels[other];
            if (lbl.has_value() && *lbl == c) return true;
        }
        return false;
    };

    // 0=P_t 1=P_g 2=P_a 3=P_r
    auto classify = [&](std::size_t k) -> std::uint8_t {
        const BipolarPattern x = space.at(k);
        const int pred = predict(m, x.bits());
        const auto it = train_by_index.find(k);
        const bool in_train = it != train_by_index.end();
        if (in_train && pred == it->second) return 0;
        const auto& oracle = oracle_labels[k];
        if (oracle.has_value()) {
            const int c = *oracle;
            if (!in_train && pred == c) return 1;
            if (pred != c && has_class_neighbor(k, c)) return 2;
        }
        return 3;
    };

    std::vector<std::uint8_t> categories(space.size());
    if (threads <= 1) {
        for (std::size_t k = 0; k < space.size(); ++k) categories[k] = classify(k);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            constexpr std::size_t chunk = 256;
            for (;;) {
                const std::size_t start = next.fetch_add(chunk);
                if (start >= categories.size()) break;
                const std::size_t stop = std::min(categories.size(), start + chunk);
                for (std::size_t k = start; k < stop; ++k) categories[k] = classify(k);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    PartitionReport report;
    report.total = space.size();
    for (std::uint8_t c : categories) {
        switch (c) {
            case 0: ++report.trained; break;
            case 1: ++report.generalized; break;
            case 2: ++report.adversarial; break;
            default: ++report.irrelevant; break;
        }
    }
    if (keep_per_pattern) report.per_pattern = std::move(categories);
    return report;
}

void write_partition_report_json(const PartitionReport& report, const std::string& path) {
    nlohmann::json j;
    j["P_t"] = report.trained;
    j["P_g"] = report.generalized;
    j["P_a"] = report.adversarial;
    j["P_r"] = report.irrelevant;
    j["P_u"] = report.total;
    j["identity_holds"] =
        report.trained + report.generalized + report.adversarial + report.irrelevant ==
        report.total;
    if (!report.per_pattern.empty()) {
        j["per_pattern"] = report.per_pattern;
    }
    write_file_bytes(path, j.dump(2) + "\n");
}

ToySpace make_toy_space(std::size_t n, std::size_t n_classes, std::size_t oracle_radius,
                        double train_fraction, std::uint64_t seed) {
    if (n_classes == 0) throw InvalidArgument("need at least one class");
    if (train_fraction <= 0.0 || train_fraction > 1.0) {
        throw InvalidArgument("train fraction must be in (0,1]");
    }
    PatternSpace space(n);
    Rng rng(seed);

    // Greedy max-min seed placement from random candidates.
    std::vector<std::size_t> seed_indices;
    seed_indices.push_back(rng.below(space.size()));
    while (seed_indices.size() < n_classes) {
        std::size_t best_idx = 0;
        std::size_t best_score = 0;
        for (std::size_t c = 0; c < 64; ++c) {
            const std::size_t cand = rng.below(space.size());
            std::size_t score = n + 1;
            for (std::size_t s : seed_indices) {
                score = std::min<std::size_t>(
                    score, static_cast<std::size_t>(__builtin_popcountll(cand ^ s)));
            }
            if (score > best_score) {
                best_score = score;
                best_idx = cand;
            }
        }
        seed_indices.push_back(best_idx);
    }

    ToySpace toy;
    toy.n = n;
    for (std::size_t s : seed_indices) toy.class_seeds.push_back(space.at(s));

    toy.oracle.assign(space.size(), std::nullopt);
    for (std::size_t k = 0; k < space.size(); ++k) {
        std::size_t best = n + 1;
        int best_class = -1;
        bool tie = false;
        for (std::size_t c = 0; c < seed_indices.size(); ++c) {
            const auto d = static_cast<std::size_t>(__builtin_popcountll(k ^ seed_indices[c]));
            if (d < best) {
                best = d;
                best_class = static_cast<int>(c);
                tie = false;
            } else if (d == best) {
                tie = true;
            }
        }
        if (best <= oracle_radius && !tie) toy.oracle[k] = best_class;
    }

    for (std::size_t c = 0; c < seed_indices.size(); ++c) {
        std::vector<std::size_t> covered;
        for (std::size_t k = 0; k < space.size(); ++k) {
            if (toy.oracle[k].has_value() && *toy.oracle[k] == static_cast<int>(c) &&
                k != seed_indices[c]) {
                covered.push_back(k);
            }
        }
        rng.shuffle(covered);
        const auto want = static_cast<std::size_t>(
            std::ceil(train_fraction * static_cast<double>(covered.size() + 1)));
        toy.train.patterns.push_back(space.at(seed_indices[c]));
        toy.train.labels.push_back(static_cast<int>(c));
        for (std::size_t i = 0; i + 1 < want && i < covered.size(); ++i) {
            toy.train.patterns.push_back(space.at(covered[i]));
            toy.train.labels.push_back(static_cast<int>(c));
        }
    }
    return toy;
}

HopfieldTransform HopfieldTransform::identity(std::size_t n) {
    HopfieldTransform t;
    t.name = "identity";
    t.permutation.resize(n);
    std::iota(t.permutation.begin(), t.permutation.end(), std::size_t{0});
    t.row_signs.assign(n, 1);
    t.col_signs.assign(n, 1);
    t.transform_probes = false;
    return t;
}

HopfieldTransform HopfieldTransform::relabeling(std::string name, std::vector<std::size_t> perm,
                                                std::vector<std::int8_t> signs,
                                                bool transform_probes) {
    HopfieldTransform t;
    t.name = std::move(name);
    t.permutation = std::move(perm);
    t.row_signs = signs;
    t.col_signs = std::move(signs);
    t.transform_probes = transform_probes;
    return t;
}

HopfieldProbeReport hopfield_equioutput_probe(const HopfieldNet& net,
                                              const std::vector<HopfieldTransform>& transforms,
                                              const std::vector<BipolarPattern>& probes,
                                              std::size_t max_sweeps, std::uint64_t seed) {
    const std::size_t n = net.dim();
    HopfieldProbeReport report;
    for (const auto& t : transforms) {
        if (t.permutation.size() != n || t.row_signs.size() != n || t.col_signs.size() != n) {
            throw InvalidArgument("transform size does not match the net");
        }
        std::vector<bool> seen(n, false);
        for (std::size_t j : t.permutation) {
            if (j >= n || seen[j]) throw InvalidArgument("transform permutation is not a bijection");
            seen[j] = true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if ((t.row_signs[i] != 1 && t.row_signs[i] != -1) ||
                (t.col_signs[i] != 1 && t.col_signs[i] != -1)) {
                throw InvalidArgument("transform signs must be +-1");
            }
        }

        HopfieldProbeEntry entry;
        entry.name = t.name;
        entry.n_probes = probes.size();

        Matrix w(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                w.at(i, j) = static_cast<double>(t.row_signs[i]) *
                             static_cast<double>(t.col_signs[j]) *
                             net.weight(t.permutation[i], t.permutation[j]);
            }
        }
        HopfieldNet transformed;
        try {
            transformed = HopfieldNet(std::move(w));
        } catch (const Error&) {
            entry.accepted = false;  // rejected by the symmetry/zero-diagonal invariant
            report.entries.push_back(std::move(entry));
            continue;
        }
        entry.accepted = true;

        const auto perm_inv = invert_permutation(t.permutation);
        std::size_t agree = 0;
        for (std::size_t pi = 0; pi < probes.size(); ++pi) {
            const std::uint64_t probe_seed = mix64(seed ^ (pi + 1));
            // order(sweep) is a pure function of (probe_seed, sweep) so both
            // runs see identical visit orders regardless of sweep counts.
            auto base_order = [n, probe_seed](std::size_t sweep) {
                Rng r(mix64(probe_seed ^ (sweep + 1)));
                return r.permutation(n);
            };
            const RecallResult orig =
                recall_with_orders(net, probes[pi], max_sweeps, base_order);

            if (t.transform_probes) {
                std::vector<double> tp(n);
                for (std::size_t i = 0; i < n; ++i) {
                    tp[i] = static_cast<double>(t.row_signs[i]) * probes[pi][t.permutation[i]];
                }
                auto mapped_order = [&perm_inv, base_order](std::size_t sweep) {
                    auto o = base_order(sweep);
                    for (auto& u : o) u = perm_inv[u];
                    return o;
                };
                const RecallResult trans = recall_with_orders(
                    transformed, BipolarPattern(std::move(tp)), max_sweeps, mapped_order);
                // Map the transformed fixed point back to the original frame.
                std::vector<double> back(n);
                for (std::size_t i = 0; i < n; ++i) {
                    back[t.permutation[i]] =
                        static_cast<double>(t.row_signs[i]) * trans.final_state[i];
                }
                if (BipolarPattern(std::move(back)) == orig.final_state) ++agree;
            } else {
                const RecallResult trans =
                    recall_with_orders(transformed, probes[pi], max_sweeps, base_order);
                if (trans.final_state == orig.final_state) ++agree;
            }
        }
        entry.agreement = probes.empty()
                              ? 1.0
                              : static_cast<double>(agree) / static_cast<double>(probes.size());
        report.entries.push_back(std::move(entry));
    }
    return report;
}

void write_probe_report_json(const HopfieldProbeReport& report, const std::string& path) {
    nlohmann::json j;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        nlohmann::json je;
        je["name"] = e.name;
        je["accepted"] = e.accepted;
        je["agreement"] = e.agreement;
        je["n_probes"] = e.n_probes;
        entries.push_back(std::move(je));
    }
    j["transforms"] = std::move(entries);
    write_file_bytes(path, j.dump(2) + "\n");
}

}  // namespace wsc
