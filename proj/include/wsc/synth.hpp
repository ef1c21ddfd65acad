#pragma once

#include <cstdint>
#include <vector>

#include "wsc/patterns.hpp"

namespace wsc {

// Deterministic 28x28 ten-class digit corpus in MNIST layout: dot-matrix
// glyphs with per-sample translation jitter, pixel noise and intensity
// variation. A stand-in generator for environments without the MNIST files;
// everything downstream consumes it through the IDX loader.
struct SynthConfig {
    std::size_t count = 2000;
    std::uint64_t seed = 1;
    double noise_sigma = 0.12;   // additive gaussian pixel noise, clipped to [0,1]
    int max_shift = 0;           // uniform per-sample translation in pixels
    double min_intensity = 0.85; // glyph stroke intensity drawn in [min,1]
};

std::vector<GrayImage> synth_digits(const SynthConfig& cfg);

}  // namespace wsc
