#include "facegraph/product_quantizer.hpp"

#include <string>

#include "facegraph/error.hpp"

namespace facegraph {

ProductQuantizer::ProductQuantizer(std::size_t dim, std::size_t m) : dim_(dim), m_(m) {
    if (m == 0 || dim == 0 || dim % m != 0) {
        throw InvalidArgument("subquantizer count " + std::to_string(m) + " must divide " +
                              std::to_string(dim));
    }
    dsub_ = dim / m;
    codebooks_.assign(m_ * kCodebookSize * dsub_, 0.0f);
}

void ProductQuantizer::train(std::span<const float> data, const KMeansOptions& options) {
    const std::size_t n = data.size() / dim_;
    if (n < kCodebookSize) {
        throw InsufficientTrainingData("product quantizer needs at least " +
                                       std::to_string(kCodebookSize) + " training vectors, got " +
                                       std::to_string(n));
    }
    std::vector<float> sub(n * dsub_);
    for (std::size_t s = 0; s < m_; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            const float* src = data.data() + i * dim_ + s * dsub_;
            std::copy(src, src + dsub_, sub.begin() + static_cast<std::ptrdiff_t>(i * dsub_));
        }
        KMeansOptions opts = options;
        opts.seed = options.seed + s;
        auto fit = kmeans(sub, dsub_, kCodebookSize, opts);
        std::copy(fit.centroids.begin(), fit.centroids.end(),
                  codebooks_.begin() + static_cast<std::ptrdiff_t>(s * kCodebookSize * dsub_));
    }
    trained_ = true;
}

std::span<const float> ProductQuantizer::centroid(std::size_t s, std::size_t k) const {
    return std::span<const float>(codebooks_).subspan((s * kCodebookSize + k) * dsub_, dsub_);
}

void ProductQuantizer::encode(std::span<const float> x, std::span<std::uint8_t> code) const {
    for (std::size_t s = 0; s < m_; ++s) {
        const auto book = std::span<const float>(codebooks_).subspan(s * kCodebookSize * dsub_,
                                                                     kCodebookSize * dsub_);
        code[s] = static_cast<std::uint8_t>(nearest_centroid(book, dsub_, x.subspan(s * dsub_, dsub_)));
    }
}

void ProductQuantizer::decode(std::span<const std::uint8_t> code, std::span<float> x) const {
    for (std::size_t s = 0; s < m_; ++s) {
        const auto c = centroid(s, code[s]);
        std::copy(c.begin(), c.end(), x.begin() + static_cast<std::ptrdiff_t>(s * dsub_));
    }
}

void ProductQuantizer::distance_table(std::span<const float> x, std::span<double> table) const {
    for (std::size_t s = 0; s < m_; ++s) {
        const auto book = std::span<const float>(codebooks_).subspan(s * kCodebookSize * dsub_,
                                                                     kCodebookSize * dsub_);
        centroid_distances(book, dsub_, x.subspan(s * dsub_, dsub_),
                           table.subspan(s * kCodebookSize, kCodebookSize));
    }
}

void ProductQuantizer::inner_product_table(std::span<const float> x, std::span<double> table) const {
    for (std::size_t s = 0; s < m_; ++s) {
        const float* xs = x.data() + s * dsub_;
        const float* book = codebooks_.data() + s * kCodebookSize * dsub_;
        double* out = table.data() + s * kCodebookSize;
        for (std::size_t k = 0; k < kCodebookSize; ++k) {
            const float* c = book + k * dsub_;
            double acc = 0;
            for (std::size_t d = 0; d < dsub_; ++d) acc += static_cast<double>(xs[d]) * c[d];
            out[k] = acc;
        }
    }
}

void ProductQuantizer::set_codebooks(std::vector<float> codebooks) {
    if (codebooks.size() != m_ * kCodebookSize * dsub_) {
        throw InvalidArgument("codebook size mismatch");
    }
    codebooks_ = std::move(codebooks);
    trained_ = true;
}

}  // namespace facegraph
