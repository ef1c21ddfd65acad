#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include "wsc/error.hpp"

namespace wsc {

// A grayscale image with pixels in [0,1] and a class label.
struct GrayImage {
    std::vector<double> pixels;
    int label = -1;
};

// Fixed-length vector with entries exactly -1.0 or +1.0. Stored as doubles
// so the pattern feeds the dense kernels (local fields, MLP inputs) directly.
class BipolarPattern {
public:
    BipolarPattern() = default;

    // Validates that every entry is exactly +-1.
    explicit BipolarPattern(std::vector<double> bits);

    // n copies of value (+1 or -1).
    static BipolarPattern filled(std::size_t n, double value);

    std::size_t size() const { return bits_.size(); }
    double operator[](std::size_t i) const { return bits_[i]; }
    const std::vector<double>& bits() const { return bits_; }
    const double* data() const { return bits_.data(); }

    // Global sign flip.
    BipolarPattern negated() const;

    bool operator==(const BipolarPattern& o) const { return bits_ == o.bits_; }

private:
    std::vector<double> bits_;
};

// Ordered list of same-dimension patterns with optional parallel labels.
struct PatternSet {
    std::vector<BipolarPattern> patterns;
    std::vector<int> labels;  // empty, or one label per pattern

    std::size_t count() const { return patterns.size(); }
    std::size_t dim() const { return patterns.empty() ? 0 : patterns.front().size(); }
    bool labeled() const { return !labels.empty(); }

    // Checks P >= 1, uniform dimension, label list length.
    void validate() const;
};

// bit_i = +1 if pixel_i > threshold, else -1 (strict inequality).
BipolarPattern binarize(const GrayImage& img, double threshold = 0.5);

// Number of differing positions. Throws DimensionMismatch.
std::size_t hamming(const BipolarPattern& a, const BipolarPattern& b);

// Returns p with exactly the listed positions negated.
BipolarPattern flip_bits(const BipolarPattern& p, const std::set<std::size_t>& indices);

// All 2^n patterns of dimension n <= 20, in binary-counting order:
// pattern k has bit i = +1 iff (k >> i) & 1, else -1.
class PatternSpace {
public:
    explicit PatternSpace(std::size_t n);

    std::size_t dim() const { return n_; }
    std::size_t size() const { return std::size_t{1} << n_; }

    BipolarPattern at(std::size_t index) const;

    // Index of a pattern under the same encoding (inverse of at()).
    std::size_t index_of(const BipolarPattern& p) const;

    class iterator {
    public:
        using value_type = BipolarPattern;
        using difference_type = std::ptrdiff_t;

        iterator(const PatternSpace* s, std::size_t k) : space_(s), k_(k) {}
        BipolarPattern operator*() const { return space_->at(k_); }
        iterator& operator++() { ++k_; return *this; }
        iterator operator++(int) { iterator t = *this; ++k_; return t; }
        bool operator==(const iterator& o) const { return k_ == o.k_; }

    private:
        const PatternSpace* space_;
        std::size_t k_;
    };

    iterator begin() const { return iterator(this, 0); }
    iterator end() const { return iterator(this, size()); }

private:
    std::size_t n_;
};

}  // namespace wsc
