#include "facegraph/embedding.hpp"

#include <cmath>
#include <string>

#include "facegraph/error.hpp"

namespace facegraph {

namespace {

template <typename T>
FaceEmbedding::Storage validated(std::span<const T> values) {
    if (values.size() != kEmbeddingDim) {
        throw InvalidEmbedding("embedding has " + std::to_string(values.size()) +
                               " values, expected " + std::to_string(kEmbeddingDim));
    }
    FaceEmbedding::Storage out{};
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
        const auto v = static_cast<float>(values[i]);
        if (!std::isfinite(values[i]) || !std::isfinite(v)) {
            throw InvalidEmbedding("embedding value " + std::to_string(i) + " is not finite");
        }
        out[i] = v;
    }
    return out;
}

}  // namespace

FaceEmbedding::FaceEmbedding(std::span<const float> values) : values_(validated(values)) {}

FaceEmbedding::FaceEmbedding(std::span<const double> values) : values_(validated(values)) {}

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
    double sum = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return sum;
}

double euclidean_distance(const FaceEmbedding& a, const FaceEmbedding& b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

bool within_threshold(double squared, double threshold) noexcept {
    const double t2 = threshold * threshold;
    // Outside a few ulps of t2 the squared comparison is already decisive.
    if (squared < t2 * (1.0 - 1e-12)) {
        return true;
    }
    if (squared > t2 * (1.0 + 1e-12)) {
        return false;
    }
    return std::sqrt(squared) < threshold;
}

}  // namespace facegraph
