#include "qualit/embedding.hpp"
#include "qualit/error.hpp"
#include "qualit/kernels.hpp"

#include <cmath>
#include <string>

namespace qualit {

double l2_norm(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
    if (values.empty()) throw InputError("embedding has no dimensions");
    const double norm = l2_norm(values);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw InputError("embedding has zero or non-finite norm");
    for (double& x : values) x /= norm;
    return EmbeddingVector(std::move(values));
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<double> values) {
    if (values.empty()) throw InputError("embedding has no dimensions");
    const double norm = l2_norm(values);
    if (std::abs(norm - 1.0) > 1e-9) {
        throw InputError("embedding is not unit length (norm " + std::to_string(norm) + ")");
    }
    return EmbeddingVector(std::move(values));
}

EmbeddingVector EmbeddingVector::basis(std::size_t dims, std::size_t index) {
    if (index >= dims) throw InputError("basis index out of range");
    std::vector<double> v(dims, 0.0);
    v[index] = 1.0;
    return EmbeddingVector(std::move(v));
}

}  // namespace qualit
