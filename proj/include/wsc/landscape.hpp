#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsc/hopfield.hpp"
#include "wsc/patterns.hpp"

namespace wsc {

// Rectangular (resolution x resolution) energy sample of a 2-D slice
// through state space. Row-major over (u index, v index).
struct SurfaceGrid {
    std::size_t resolution = 0;
    std::vector<double> u;       // fraction of differing anchor bits flipped
    std::vector<double> v;       // number of extra random flips
    std::vector<double> energy;
    std::uint64_t net_id = 0;    // FNV-1a of the serialized net
    std::uint64_t seed = 0;
    std::string anchors_desc;
};

// u axis walks from anchor_a to anchor_b by flipping the differing bits in a
// seeded fixed order; v applies that many extra seeded random flips to each
// u-state. Energy is evaluated at every grid point. Endpoints are exact:
// (u=0,v=0) -> E(anchor_a), (u=1,v=0) -> E(anchor_b).
SurfaceGrid geodesic_grid(const HopfieldNet& net, const BipolarPattern& anchor_a,
                          const BipolarPattern& anchor_b, std::size_t resolution,
                          std::uint64_t seed, std::size_t threads = 1);

// CSV "u,v,energy", row-major, doubles printed round-trip exact.
void write_surface_csv(const SurfaceGrid& grid, const std::string& path);

// Sidecar metadata for a surface CSV.
void write_surface_meta_json(const SurfaceGrid& grid, const std::string& path);

struct BasinDepthEntry {
    std::size_t pattern_index = 0;
    double energy_at_pattern = 0.0;
    double mean_neighbor_energy = 0.0;
    double gap = 0.0;  // mean_neighbor_energy - energy_at_pattern
};

// Per stored pattern: energy, mean energy over single-flip neighbors
// (exhaustive when N <= 64 or samples >= N, else a seeded distinct sample),
// and the gap. A strictly stable pattern has gap > 0.
std::vector<BasinDepthEntry> basin_depth_report(const HopfieldNet& net, const PatternSet& ps,
                                                std::size_t samples_per_pattern,
                                                std::uint64_t seed);

double mean_gap(const std::vector<BasinDepthEntry>& entries);

// CSV: pattern,energy,mean_neighbor_energy,gap
void write_basin_csv(const std::vector<BasinDepthEntry>& entries, const std::string& path);

}  // namespace wsc
