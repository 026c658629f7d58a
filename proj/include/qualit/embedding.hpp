#pragma once

#include <span>
#include <vector>

namespace qualit {

// Unit-length real vector. Construction always normalizes, so every
// instance satisfies |v| == 1 within rounding.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    // Throws InputError for empty or zero-norm input.
    static EmbeddingVector normalized(std::vector<double> values);
    // Accepts values already of unit norm (within 1e-9); used when loading
    // cached vectors so they round-trip bit-for-bit.
    static EmbeddingVector from_unit(std::vector<double> values);
    // e_index in `dims` dimensions.
    static EmbeddingVector basis(std::size_t dims, std::size_t index);

    std::size_t dims() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    explicit EmbeddingVector(std::vector<double> v) : values_(std::move(v)) {}
    std::vector<double> values_;
};

double l2_norm(std::span<const double> v);

}  // namespace qualit
