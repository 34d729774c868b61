#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "facegraph/embedding.hpp"

namespace testsupport {

using facegraph::FaceEmbedding;
using facegraph::kEmbeddingDim;

inline FaceEmbedding from_values(const std::array<double, kEmbeddingDim>& v) {
    return FaceEmbedding(std::span<const double>(v));
}

/// Zero vector with `value` at coordinate `axis`.
inline FaceEmbedding axis_point(std::size_t axis, double value) {
    std::array<double, kEmbeddingDim> v{};
    v[axis] = value;
    return from_values(v);
}

inline FaceEmbedding random_embedding(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    std::array<double, kEmbeddingDim> v{};
    for (auto& x : v) x = n(rng);
    return from_values(v);
}

inline std::vector<float> flatten(const std::vector<FaceEmbedding>& v) {
    std::vector<float> out;
    out.reserve(v.size() * kEmbeddingDim);
    for (const auto& e : v) out.insert(out.end(), e.values().begin(), e.values().end());
    return out;
}

/// Exact squared distance with long double accumulation, independent of the library.
inline long double reference_sq(const float* a, const float* b, std::size_t dim) {
    long double s = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
        s += d * d;
    }
    return s;
}

}  // namespace testsupport
