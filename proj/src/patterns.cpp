#include "wsc/patterns.hpp"

#include <string>

namespace wsc {

BipolarPattern::BipolarPattern(std::vector<double> bits) : bits_(std::move(bits)) {
    for (double b : bits_) {
        if (b != 1.0 && b != -1.0) {
            throw InvalidArgument("bipolar pattern entries must be exactly +-1");
        }
    }
}

BipolarPattern BipolarPattern::filled(std::size_t n, double value) {
    return BipolarPattern(std::vector<double>(n, value));
}

BipolarPattern BipolarPattern::negated() const {
    std::vector<double> out(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i) out[i] = -bits_[i];
    return BipolarPattern(std::move(out));
}

void PatternSet::validate() const {
    if (patterns.empty()) throw InvalidArgument("pattern set is empty");
    const std::size_t n = patterns.front().size();
    for (const auto& p : patterns) {
        if (p.size() != n) throw DimensionMismatch("pattern set has mixed dimensions");
    }
    if (!labels.empty() && labels.size() != patterns.size()) {
        throw ConsistencyError("label count does not match pattern count");
    }
}

BipolarPattern binarize(const GrayImage& img, double threshold) {
    std::vector<double> bits(img.pixels.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = img.pixels[i] > threshold ? 1.0 : -1.0;
    }
    return BipolarPattern(std::move(bits));
}

std::size_t hamming(const BipolarPattern& a, const BipolarPattern& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("hamming: dimensions differ (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) ++d;
    }
    return d;
}

BipolarPattern flip_bits(const BipolarPattern& p, const std::set<std::size_t>& indices) {
    std::vector<double> bits = p.bits();
    for (std::size_t i : indices) {
        if (i >= bits.size()) {
            throw InvalidArgument("flip_bits: index " + std::to_string(i) + " out of range");
        }
        bits[i] = -bits[i];
    }
    return BipolarPattern(std::move(bits));
}

PatternSpace::PatternSpace(std::size_t n) : n_(n) {
    if (n == 0 || n > 20) {
        throw InvalidArgument("enumerable pattern space requires 1 <= n <= 20");
    }
}

BipolarPattern PatternSpace::at(std::size_t index) const {
    std::vector<double> bits(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        bits[i] = ((index >> i) & 1u) != 0 ? 1.0 : -1.0;
    }
    return BipolarPattern(std::move(bits));
}

std::size_t PatternSpace::index_of(const BipolarPattern& p) const {
    if (p.size() != n_) throw DimensionMismatch("pattern dimension does not match space");
    std::size_t k = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (p[i] > 0.0) k |= (std::size_t{1} << i);
    }
    return k;
}

}  // namespace wsc
