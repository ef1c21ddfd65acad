#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <set>
#include <vector>

#include "testutil.hpp"
#include "wsc/error.hpp"
#include "wsc/idx.hpp"
#include "wsc/patterns.hpp"
#include "wsc/rng.hpp"

using namespace wsc;

namespace {

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream os(path, std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
}

void push_u32_be(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 24));
    v.push_back(static_cast<std::uint8_t>(x >> 16));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x));
}

}  // namespace

TEST_CASE("bipolar pattern validates entries") {
    CHECK_NOTHROW(BipolarPattern({1.0, -1.0, 1.0}));
    CHECK_THROWS_AS(BipolarPattern({1.0, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(BipolarPattern({0.0}), InvalidArgument);
}

TEST_CASE("binarize thresholds strictly") {
    GrayImage img;
    img.pixels = {0.0, 1.0, 0.6};
    CHECK(binarize(img, 0.5).bits() == std::vector<double>{-1.0, 1.0, 1.0});

    GrayImage zeros;
    zeros.pixels = {0.0, 0.0, 0.0, 0.0};
    CHECK(binarize(zeros, 0.5) == BipolarPattern::filled(4, -1.0));

    GrayImage edge;
    edge.pixels = {0.0, 0.1};
    CHECK(binarize(edge, 0.0).bits() == std::vector<double>{-1.0, 1.0});
}

TEST_CASE("hamming basics") {
    const BipolarPattern a({1.0, 1.0});
    CHECK(hamming(a, a) == 0);
    CHECK(hamming(BipolarPattern({1.0, -1.0, 1.0}), BipolarPattern({-1.0, -1.0, -1.0})) == 2);

    wsc::Rng rng(3);
    const auto x = wsctest::random_bipolar(37, rng);
    CHECK(hamming(x, x.negated()) == 37);

    CHECK_THROWS_AS(hamming(a, BipolarPattern({1.0})), DimensionMismatch);
}

TEST_CASE("hamming is a metric") {
    wsc::Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = wsctest::random_bipolar(16, rng);
        const auto y = wsctest::random_bipolar(16, rng);
        const auto z = wsctest::random_bipolar(16, rng);
        CHECK(hamming(x, y) == hamming(y, x));
        CHECK((hamming(x, y) == 0) == (x == y));
        CHECK(hamming(x, z) <= hamming(x, y) + hamming(y, z));
    }
}

TEST_CASE("flip_bits flips exactly the listed positions") {
    const BipolarPattern p({1.0, 1.0, 1.0});
    CHECK(flip_bits(p, {}) == p);
    CHECK(flip_bits(p, {0, 2}).bits() == std::vector<double>{-1.0, 1.0, -1.0});
    CHECK_THROWS_AS(flip_bits(p, {3}), InvalidArgument);

    wsc::Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = wsctest::random_bipolar(24, rng);
        std::set<std::size_t> idx;
        const std::size_t count = rng.below(10);
        while (idx.size() < count) idx.insert(rng.below(24));
        const auto flipped = flip_bits(x, idx);
        CHECK(hamming(x, flipped) == idx.size());
        CHECK(flip_bits(flipped, idx) == x);  // involution
    }
}

TEST_CASE("pattern space enumerates 2^n distinct patterns in counting order") {
    PatternSpace s2(2);
    std::set<std::vector<double>> seen;
    for (const auto& p : s2) seen.insert(p.bits());
    CHECK(seen.size() == 4);

    PatternSpace s4(4);
    std::size_t count = 0;
    std::set<std::size_t> indices;
    for (auto it = s4.begin(); it != s4.end(); ++it) {
        indices.insert(s4.index_of(*it));
        ++count;
    }
    CHECK(count == 16);
    CHECK(indices.size() == 16);

    // documented order: bit i of the index maps to position i, 1 -> +1
    CHECK(s4.at(0) == BipolarPattern::filled(4, -1.0));
    CHECK(s4.at(5).bits() == std::vector<double>{1.0, -1.0, 1.0, -1.0});

    CHECK_THROWS_AS(PatternSpace(21), InvalidArgument);
}

TEST_CASE("idx loader parses a hand-written fixture byte for byte") {
    const auto dir = wsctest::scratch_dir("idx_fixture");

    std::vector<std::uint8_t> img_bytes;
    push_u32_be(img_bytes, 0x00000803);
    push_u32_be(img_bytes, 4);  // count
    push_u32_be(img_bytes, 2);  // rows
    push_u32_be(img_bytes, 2);  // cols
    const std::uint8_t pixels[4][4] = {
        {0, 255, 127, 64}, {10, 20, 30, 40}, {200, 201, 202, 203}, {255, 0, 255, 0}};
    for (const auto& row : pixels) {
        for (std::uint8_t b : row) img_bytes.push_back(b);
    }
    std::vector<std::uint8_t> lbl_bytes;
    push_u32_be(lbl_bytes, 0x00000801);
    push_u32_be(lbl_bytes, 4);
    for (std::uint8_t l : {7, 0, 3, 9}) lbl_bytes.push_back(l);

    write_bytes(dir / "img", img_bytes);
    write_bytes(dir / "lbl", lbl_bytes);

    const auto images = load_idx((dir / "img").string(), (dir / "lbl").string());
    REQUIRE(images.size() == 4);
    const int want_labels[] = {7, 0, 3, 9};
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(images[k].label == want_labels[k]);
        REQUIRE(images[k].pixels.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(images[k].pixels[i] == pixels[k][i] / 255.0);
        }
    }
}

TEST_CASE("idx loader rejects malformed files") {
    const auto dir = wsctest::scratch_dir("idx_bad");

    // zero magic
    std::vector<std::uint8_t> bad_magic;
    push_u32_be(bad_magic, 0x00000000);
    push_u32_be(bad_magic, 1);
    push_u32_be(bad_magic, 1);
    push_u32_be(bad_magic, 1);
    bad_magic.push_back(0);
    std::vector<std::uint8_t> lbl;
    push_u32_be(lbl, 0x00000801);
    push_u32_be(lbl, 1);
    lbl.push_back(0);
    write_bytes(dir / "bad_img", bad_magic);
    write_bytes(dir / "lbl", lbl);
    CHECK_THROWS_AS(load_idx((dir / "bad_img").string(), (dir / "lbl").string()), FormatError);

    // count mismatch: 10 images declared vs 9 labels declared
    std::vector<std::uint8_t> img10;
    push_u32_be(img10, 0x00000803);
    push_u32_be(img10, 10);
    push_u32_be(img10, 1);
    push_u32_be(img10, 1);
    for (int i = 0; i < 10; ++i) img10.push_back(0);
    std::vector<std::uint8_t> lbl9;
    push_u32_be(lbl9, 0x00000801);
    push_u32_be(lbl9, 9);
    for (int i = 0; i < 9; ++i) lbl9.push_back(0);
    write_bytes(dir / "img10", img10);
    write_bytes(dir / "lbl9", lbl9);
    CHECK_THROWS_AS(load_idx((dir / "img10").string(), (dir / "lbl9").string()),
                    ConsistencyError);

    // truncated image payload
    std::vector<std::uint8_t> trunc;
    push_u32_be(trunc, 0x00000803);
    push_u32_be(trunc, 2);
    push_u32_be(trunc, 2);
    push_u32_be(trunc, 2);
    trunc.push_back(1);  // 1 of 8 pixel bytes
    std::vector<std::uint8_t> lbl2;
    push_u32_be(lbl2, 0x00000801);
    push_u32_be(lbl2, 2);
    lbl2.push_back(0);
    lbl2.push_back(1);
    write_bytes(dir / "trunc", trunc);
    write_bytes(dir / "lbl2", lbl2);
    CHECK_THROWS_AS(load_idx((dir / "trunc").string(), (dir / "lbl2").string()), IoError);

    // missing file
    CHECK_THROWS_AS(load_idx((dir / "nope").string(), (dir / "lbl2").string()), IoError);
}

TEST_CASE("idx save/load round-trips quantized pixels") {
    const auto dir = wsctest::scratch_dir("idx_roundtrip");
    wsc::Rng rng(6);
    std::vector<GrayImage> images(5);
    for (std::size_t k = 0; k < images.size(); ++k) {
        images[k].label = static_cast<int>(k);
        images[k].pixels.resize(9);
        for (double& p : images[k].pixels) {
            p = static_cast<double>(rng.below(256)) / 255.0;  // exactly representable bytes
        }
    }
    save_idx(images, 3, 3, (dir / "img").string(), (dir / "lbl").string());
    const auto back = load_idx((dir / "img").string(), (dir / "lbl").string());
    REQUIRE(back.size() == images.size());
    for (std::size_t k = 0; k < images.size(); ++k) {
        CHECK(back[k].label == images[k].label);
        CHECK(back[k].pixels == images[k].pixels);
    }
}
