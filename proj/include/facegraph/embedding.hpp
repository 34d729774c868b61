#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace facegraph {

inline constexpr std::size_t kEmbeddingDim = 128;

/// Distance below which two faces are considered the same person.
inline constexpr double kDefaultMatchThreshold = 0.5;

/// A 128-d face descriptor. Always holds finite values; construction from
/// untrusted data validates length and finiteness.
class FaceEmbedding {
public:
    using Storage = std::array<float, kEmbeddingDim>;

    FaceEmbedding() = default;

    /// Throws InvalidEmbedding on wrong length or non-finite values.
    explicit FaceEmbedding(std::span<const float> values);
    explicit FaceEmbedding(std::span<const double> values);

    std::span<const float, kEmbeddingDim> values() const noexcept { return values_; }
    const float* data() const noexcept { return values_.data(); }
    float operator[](std::size_t i) const noexcept { return values_[i]; }

    bool operator==(const FaceEmbedding&) const = default;

private:
    Storage values_{};
};

/// Squared L2 distance, accumulated in double in coordinate order.
double squared_distance(std::span<const float> a, std::span<const float> b) noexcept;

inline double squared_distance(const FaceEmbedding& a, const FaceEmbedding& b) noexcept {
    return squared_distance(a.values(), b.values());
}

double euclidean_distance(const FaceEmbedding& a, const FaceEmbedding& b) noexcept;

/// The match rule: true distance strictly below the threshold.
///
/// Compared in squared space first; the square root is only taken to settle
/// values within rounding distance of threshold^2, so the decision always
/// agrees with `euclidean_distance(a, b) < threshold`.
bool within_threshold(double squared, double threshold) noexcept;

}  // namespace facegraph
