#pragma once

#include <string>
#include <vector>

#include "wsc/patterns.hpp"

namespace wsc {

// IDX magics per the MNIST distribution (big-endian on disk).
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Loads an MNIST-style IDX image/label pair. Pixels are rescaled to [0,1]
// by division by 255; image order is preserved.
// Throws FormatError on a bad magic, ConsistencyError when the image and
// label counts disagree, IoError on missing/truncated files.
std::vector<GrayImage> load_idx(const std::string& images_path,
                                const std::string& labels_path);

// Writes the inverse of load_idx: pixels are clamped to [0,1] and quantized
// to bytes by rounding pixel*255. All images must share rows*cols == dim.
void save_idx(const std::vector<GrayImage>& images, std::size_t rows, std::size_t cols,
              const std::string& images_path, const std::string& labels_path);

}  // namespace wsc
