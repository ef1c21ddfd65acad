#include "wsc/synth.hpp"

#include <algorithm>
#include <array>

#include "wsc/rng.hpp"

namespace wsc {

namespace {

constexpr int kSide = 28;

// Classic 5x7 dot-matrix digit font, one row per byte, bit 4 = leftmost
// column. Rendered at 3x scale (15x21) the pairwise glyph distances stay
// large enough for prototype-based recall.
constexpr std::array<std::array<std::uint8_t, 7>, 10> kFont = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
}};

constexpr int kScale = 3;
constexpr int kGlyphTop = 3;   // 21 rows tall
constexpr int kGlyphLeft = 6;  // 15 cols wide

std::vector<double> glyph(int digit) {
    std::vector<double> px(kSide * kSide, 0.0);
    const auto& rows = kFont[static_cast<std::size_t>(digit)];
    for (int fr = 0; fr < 7; ++fr) {
        for (int fc = 0; fc < 5; ++fc) {
            if (((rows[static_cast<std::size_t>(fr)] >> (4 - fc)) & 1) == 0) continue;
            for (int dr = 0; dr < kScale; ++dr) {
                for (int dc = 0; dc < kScale; ++dc) {
                    const int row = kGlyphTop + fr * kScale + dr;
                    const int col = kGlyphLeft + fc * kScale + dc;
                    px[static_cast<std::size_t>(row * kSide + col)] = 1.0;
                }
            }
        }
    }
    return px;
}

}  // namespace

std::vector<GrayImage> synth_digits(const SynthConfig& cfg) {
    std::array<std::vector<double>, 10> glyphs;
    for (int d = 0; d < 10; ++d) glyphs[static_cast<std::size_t>(d)] = glyph(d);

    Rng rng(cfg.seed);
    std::vector<GrayImage> out;
    out.reserve(cfg.count);
    for (std::size_t k = 0; k < cfg.count; ++k) {
        const int digit = static_cast<int>(k % 10);
        const int span = 2 * cfg.max_shift + 1;
        const int dr = static_cast<int>(rng.below(static_cast<std::size_t>(span))) - cfg.max_shift;
        const int dc = static_cast<int>(rng.below(static_cast<std::size_t>(span))) - cfg.max_shift;
        const double intensity = rng.uniform(cfg.min_intensity, 1.0);

        GrayImage img;
        img.label = digit;
        img.pixels.assign(kSide * kSide, 0.0);
        const auto& base = glyphs[static_cast<std::size_t>(digit)];
        for (int row = 0; row < kSide; ++row) {
            for (int col = 0; col < kSide; ++col) {
                const int sr = row - dr;
                const int sc = col - dc;
                double v = 0.0;
                if (sr >= 0 && sr < kSide && sc >= 0 && sc < kSide) {
                    v = base[static_cast<std::size_t>(sr * kSide + sc)] * intensity;
                }
                v += cfg.noise_sigma * rng.normal();
                img.pixels[static_cast<std::size_t>(row * kSide + col)] =
                    std::clamp(v, 0.0, 1.0);
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace wsc
