#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "facegraph/kmeans.hpp"

namespace facegraph {

/// Splits a vector into `m` contiguous sub-vectors and quantizes each against
/// its own 256-entry codebook, so a code is `m` bytes.
class ProductQuantizer {
public:
    static constexpr std::size_t kCodebookSize = 256;

    ProductQuantizer() = default;
    /// Throws InvalidArgument unless `m` divides `dim`.
    ProductQuantizer(std::size_t dim, std::size_t m);

    /// Fits one codebook per subspace by k-means over `data` (n x dim).
    /// Needs n >= 256. Subspace s uses seed `options.seed + s`.
    void train(std::span<const float> data, const KMeansOptions& options);

    bool trained() const noexcept { return trained_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t m() const noexcept { return m_; }
    std::size_t dsub() const noexcept { return dsub_; }
    std::size_t code_size() const noexcept { return m_; }

    void encode(std::span<const float> x, std::span<std::uint8_t> code) const;
    void decode(std::span<const std::uint8_t> code, std::span<float> x) const;

    /// table[s * 256 + k] = ||x_s - c_{s,k}||^2
    void distance_table(std::span<const float> x, std::span<double> table) const;
    /// table[s * 256 + k] = <x_s, c_{s,k}>
    void inner_product_table(std::span<const float> x, std::span<double> table) const;

    /// Centroid k of subspace s.
    std::span<const float> centroid(std::size_t s, std::size_t k) const;

    /// Raw codebooks, m x 256 x dsub.
    const std::vector<float>& codebooks() const noexcept { return codebooks_; }
    /// Replaces the codebooks (snapshot loading, tests). Marks the quantizer trained.
    void set_codebooks(std::vector<float> codebooks);

private:
    std::size_t dim_ = 0;
    std::size_t m_ = 0;
    std::size_t dsub_ = 0;
    bool trained_ = false;
    std::vector<float> codebooks_;
};

}  // namespace facegraph
