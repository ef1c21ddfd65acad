#include "wsc/landscape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wsc/io.hpp"
#include "wsc/kernels.hpp"
#include "wsc/rng.hpp"

namespace wsc {

namespace {

std::uint64_t net_content_id(const HopfieldNet& net) {
    std::ostringstream ss;
    write_u32(ss, static_cast<std::uint32_t>(net.dim()));
    for (std::size_t i = 0; i < net.dim(); ++i) {
        for (std::size_t j = i + 1; j < net.dim(); ++j) write_f64(ss, net.weight(i, j));
    }
    return fnv1a64_bytes(ss.str());
}

}  // namespace

SurfaceGrid geodesic_grid(const HopfieldNet& net, const BipolarPattern& anchor_a,
                          const BipolarPattern& anchor_b, std::size_t resolution,
                          std::uint64_t seed, std::size_t threads) {
    const std::size_t n = net.dim();
    if (anchor_a.size() != n || anchor_b.size() != n) {
        throw DimensionMismatch("geodesic_grid: anchor dimension does not match net");
    }
    if (resolution < 2) throw InvalidArgument("geodesic_grid: resolution must be >= 2");

    // Differing bits, walked in one fixed seeded order along the u axis.
    std::vector<std::size_t> diff;
    for (std::size_t i = 0; i < n; ++i) {
        if (anchor_a[i] != anchor_b[i]) diff.push_back(i);
    }
    Rng path_rng(mix64(seed ^ 0x9d2c5680ull));
    path_rng.shuffle(diff);

    const std::size_t r = resolution;
    SurfaceGrid grid;
    grid.resolution = r;
    grid.seed = seed;
    grid.net_id = net_content_id(net);
    grid.u.resize(r * r);
    grid.v.resize(r * r);
    grid.energy.resize(r * r);

    auto eval_point = [&](std::size_t flat) {
        const std::size_t k = flat / r;  // u index
        const std::size_t j = flat % r;  // v index
        const std::size_t flipped =
            diff.empty() ? 0
                         : static_cast<std::size_t>(std::llround(
                               static_cast<double>(k) * static_cast<double>(diff.size()) /
                               static_cast<double>(r - 1)));
        std::vector<double> state = anchor_a.bits();
        for (std::size_t t = 0; t < flipped; ++t) state[diff[t]] = -state[diff[t]];

        const std::size_t extra = std::min(j, n);
        if (extra > 0) {
            Rng noise_rng(mix64(seed ^ (flat + 0x51ull)));
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t t = 0; t < extra; ++t) {
                const std::size_t pick = t + noise_rng.below(n - t);
                std::swap(idx[t], idx[pick]);
                state[idx[t]] = -state[idx[t]];
            }
        }

        grid.u[flat] = diff.empty() ? 0.0
                                    : static_cast<double>(flipped) /
                                          static_cast<double>(diff.size());
        grid.v[flat] = static_cast<double>(extra);
        grid.energy[flat] = energy(net, BipolarPattern(std::move(state)));
    };

    const std::size_t total = r * r;
    if (threads <= 1) {
        for (std::size_t flat = 0; flat < total; ++flat) eval_point(flat);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t flat = next.fetch_add(1);
                if (flat >= total) break;
                eval_point(flat);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return grid;
}

void write_surface_csv(const SurfaceGrid& grid, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "u,v,energy\n";
    for (std::size_t i = 0; i < grid.energy.size(); ++i) {
        os << format_double(grid.u[i]) << ',' << format_double(grid.v[i]) << ','
           << format_double(grid.energy[i]) << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

void write_surface_meta_json(const SurfaceGrid& grid, const std::string& path) {
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "%016llx",
                  static_cast<unsigned long long>(grid.net_id));
    nlohmann::json j;
    j["net_id"] = idbuf;
    j["resolution"] = grid.resolution;
    j["seed"] = grid.seed;
    j["anchors"] = grid.anchors_desc;
    j["rows"] = "row-major over (u index, v index)";
    j["u"] = "fraction of differing anchor bits flipped along the seeded path";
    j["v"] = "number of extra seeded random bit flips";
    write_file_bytes(path, j.dump(2) + "\n");
}

std::vector<BasinDepthEntry> basin_depth_report(const HopfieldNet& net, const PatternSet& ps,
                                                std::size_t samples_per_pattern,
                                                std::uint64_t seed) {
    ps.validate();
    const std::size_t n = net.dim();
    if (ps.dim() != n) throw DimensionMismatch("basin_depth: pattern dimension mismatch");

    std::vector<BasinDepthEntry> out;
    out.reserve(ps.count());
    std::vector<double> h(n);
    for (std::size_t mu = 0; mu < ps.count(); ++mu) {
        const auto& xi = ps.patterns[mu];
        kernels::matvec(net.weights().data.data(), n, n, xi.data(), h.data());
        const double e0 = -0.5 * kernels::dot(xi.data(), h.data(), n);

        // Single-flip neighbor i sits at E + 2 xi_i h_i.
        BasinDepthEntry entry;
        entry.pattern_index = mu;
        entry.energy_at_pattern = e0;
        const bool exhaustive = n <= 64 || samples_per_pattern == 0 || samples_per_pattern >= n;
        double sum = 0.0;
        std::size_t count = 0;
        if (exhaustive) {
            for (std::size_t i = 0; i < n; ++i) sum += e0 + 2.0 * xi[i] * h[i];
            count = n;
        } else {
            Rng rng(mix64(seed ^ (mu + 1)));
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t t = 0; t < samples_per_pattern; ++t) {
                const std::size_t pick = t + rng.below(n - t);
                std::swap(idx[t], idx[pick]);
                sum += e0 + 2.0 * xi[idx[t]] * h[idx[t]];
            }
            count = samples_per_pattern;
        }
        entry.mean_neighbor_energy = sum / static_cast<double>(count);
        entry.gap = entry.mean_neighbor_energy - entry.energy_at_pattern;
        out.push_back(entry);
    }
    return out;
}

double mean_gap(const std::vector<BasinDepthEntry>& entries) {
    if (entries.empty()) throw InvalidArgument("mean_gap of an empty report");
    double s = 0.0;
    for (const auto& e : entries) s += e.gap;
    return s / static_cast<double>(entries.size());
}

void write_basin_csv(const std::vector<BasinDepthEntry>& entries, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "pattern,energy,mean_neighbor_energy,gap\n";
    for (const auto& e : entries) {
        os << e.pattern_index << ',' << format_double(e.energy_at_pattern) << ','
           << format_double(e.mean_neighbor_energy) << ',' << format_double(e.gap) << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace wsc
