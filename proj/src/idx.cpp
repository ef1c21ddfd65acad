#include "wsc/idx.hpp"

#include <cmath>
#include <cstdio>

#include "wsc/io.hpp"

namespace wsc {

namespace {

std::uint32_t read_u32_be(std::istream& is, const std::string& what) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (is.gcount() != 4) throw IoError("truncated IDX file while reading " + what);
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void write_u32_be(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

}  // namespace

std::vector<GrayImage> load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img = open_in(images_path);
    std::ifstream lbl = open_in(labels_path);

    const std::uint32_t img_magic = read_u32_be(img, "image magic");
    if (img_magic != kIdxImagesMagic) {
        throw FormatError("bad IDX image magic " + hex32(img_magic) + " in " + images_path);
    }
    const std::uint32_t lbl_magic = read_u32_be(lbl, "label magic");
    if (lbl_magic != kIdxLabelsMagic) {
        throw FormatError("bad IDX label magic " + hex32(lbl_magic) + " in " + labels_path);
    }

    const std::uint32_t n_images = read_u32_be(img, "image count");
    const std::uint32_t rows = read_u32_be(img, "row count");
    const std::uint32_t cols = read_u32_be(img, "column count");
    const std::uint32_t n_labels = read_u32_be(lbl, "label count");
    if (n_images != n_labels) {
        throw ConsistencyError("IDX count mismatch: " + std::to_string(n_images) + " images vs " +
                               std::to_string(n_labels) + " labels");
    }

    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> pixel_buf(dim);
    std::vector<GrayImage> out;
    out.reserve(n_images);
    for (std::uint32_t k = 0; k < n_images; ++k) {
        img.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(dim));
        if (static_cast<std::size_t>(img.gcount()) != dim) {
            throw IoError("truncated IDX image file at image " + std::to_string(k));
        }
        int label = lbl.get();
        if (label == EOF) throw IoError("truncated IDX label file at label " + std::to_string(k));

        GrayImage g;
        g.label = label;
        g.pixels.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) g.pixels[i] = pixel_buf[i] / 255.0;
        out.push_back(std::move(g));
    }
    return out;
}

void save_idx(const std::vector<GrayImage>& images, std::size_t rows, std::size_t cols,
              const std::string& images_path, const std::string& labels_path) {
    const std::size_t dim = rows * cols;
    for (const auto& g : images) {
        if (g.pixels.size() != dim) {
            throw DimensionMismatch("save_idx: image dimension does not match rows*cols");
        }
    }

    std::ofstream img = open_out(images_path);
    write_u32_be(img, kIdxImagesMagic);
    write_u32_be(img, static_cast<std::uint32_t>(images.size()));
    write_u32_be(img, static_cast<std::uint32_t>(rows));
    write_u32_be(img, static_cast<std::uint32_t>(cols));
    std::vector<unsigned char> buf(dim);
    for (const auto& g : images) {
        for (std::size_t i = 0; i < dim; ++i) {
            double p = g.pixels[i];
            if (p < 0.0) p = 0.0;
            if (p > 1.0) p = 1.0;
            buf[i] = static_cast<unsigned char>(std::lround(p * 255.0));
        }
        img.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(dim));
    }
    if (!img) throw IoError("write failed: " + images_path);

    std::ofstream lbl = open_out(labels_path);
    write_u32_be(lbl, kIdxLabelsMagic);
    write_u32_be(lbl, static_cast<std::uint32_t>(images.size()));
    for (const auto& g : images) {
        lbl.put(static_cast<char>(g.label));
    }
    if (!lbl) throw IoError("write failed: " + labels_path);
}

}  // namespace wsc
