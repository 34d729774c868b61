#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facegraph/embedding.hpp"
#include "facegraph/kmeans.hpp"
#include "facegraph/product_quantizer.hpp"

namespace facegraph {

using VectorId = std::uint32_t;

enum class Backend { Flat, IvfPq };

std::string to_string(Backend backend);
/// Accepts "flat" / "ivfpq" (case-insensitive). Throws InvalidArgument otherwise.
Backend parse_backend(const std::string& name);

struct IndexConfig {
    Backend backend = Backend::Flat;

    /// Coarse clusters. 0 means auto: max(1, floor(4 * sqrt(n))) where n is
    /// `expected_size` if set, else the training sample size.
    std::size_t nlist = 0;
    std::size_t expected_size = 0;
    /// PQ subquantizers; must divide 128. Codes are always 8 bits per subspace.
    std::size_t m = 8;
    std::size_t nprobe = 8;
    /// Vectors buffered (and searched exactly) before the IVFPQ index trains itself.
    std::size_t train_min = 1024;
    /// When false, an untrained IVFPQ index rejects add/search with UntrainedIndex.
    bool buffer_until_trained = true;
    std::uint64_t seed = 1;
    std::size_t kmeans_iterations = 25;
    double kmeans_tolerance = 1e-4;

    /// Throws InvalidArgument on inconsistent settings.
    void validate() const;
};

/// nlist actually used for a training sample of `sample_size` vectors.
std::size_t resolve_nlist(const IndexConfig& config, std::size_t sample_size);

struct SearchHit {
    VectorId id = 0;
    double distance = 0.0;

    bool operator==(const SearchHit&) const = default;
};

/// Incremental nearest-neighbour index. Ids are dense in insertion order.
/// Single writer; const members are safe for concurrent readers between writes.
class VectorIndex {
public:
    virtual ~VectorIndex() = default;

    virtual VectorId add(const FaceEmbedding& embedding) = 0;

    /// Nearest stored vector if its distance is strictly below `threshold`.
    /// Ties go to the lowest id. Throws InvalidArgument unless threshold > 0.
    virtual std::optional<SearchHit> search_nearest(const FaceEmbedding& query,
                                                    double threshold) const = 0;

    virtual std::size_t size() const noexcept = 0;
    virtual const IndexConfig& config() const noexcept = 0;

    /// Binary snapshot; `load_index` restores an index with identical search results.
    virtual void save(std::ostream& out) const = 0;
};

std::unique_ptr<VectorIndex> make_index(const IndexConfig& config);
std::unique_ptr<VectorIndex> load_index(std::istream& in);

/// Exact brute-force L2 search.
class FlatIndex final : public VectorIndex {
public:
    explicit FlatIndex(IndexConfig config = {});

    VectorId add(const FaceEmbedding& embedding) override;
    std::optional<SearchHit> search_nearest(const FaceEmbedding& query,
                                            double threshold) const override;
    std::size_t size() const noexcept override { return data_.size() / kEmbeddingDim; }
    const IndexConfig& config() const noexcept override { return config_; }
    void save(std::ostream& out) const override;

    static std::unique_ptr<FlatIndex> load(std::istream& in, IndexConfig config);

private:
    IndexConfig config_;
    std::vector<float> data_;
};

/// Coarse assignment plus PQ code of one vector.
struct IvfPqCode {
    std::uint32_t list = 0;
    std::vector<std::uint8_t> code;
};

/// Inverted file over coarse k-means centroids; each list stores the PQ code
/// of the residual (vector minus its centroid). Until trained, vectors sit in
/// an exact-search buffer (see IndexConfig::train_min).
class IvfPqIndex final : public VectorIndex {
public:
    struct InvertedList {
        std::vector<VectorId> ids;
        std::vector<std::uint8_t> codes;  // ids.size() x m
    };

    explicit IvfPqIndex(IndexConfig config);

    VectorId add(const FaceEmbedding& embedding) override;
    std::optional<SearchHit> search_nearest(const FaceEmbedding& query,
                                            double threshold) const override;
    std::size_t size() const noexcept override { return next_id_; }
    const IndexConfig& config() const noexcept override { return config_; }
    void save(std::ostream& out) const override;

    static std::unique_ptr<IvfPqIndex> load(std::istream& in, IndexConfig config);

    /// Fits coarse centroids and PQ codebooks (over residuals) on `sample`,
    /// then migrates any buffered vectors into the inverted lists.
    /// Throws InsufficientTrainingData when the sample has fewer than
    /// max(nlist, 256) vectors, InvalidArgument when already trained.
    void train(std::span<const FaceEmbedding> sample);

    bool trained() const noexcept { return trained_; }
    std::size_t nlist() const noexcept { return coarse_.size() / kEmbeddingDim; }
    std::size_t nprobe() const noexcept;
    std::size_t buffered() const noexcept { return buffer_.size() / kEmbeddingDim; }

    const std::vector<float>& coarse_centroids() const noexcept { return coarse_; }
    const ProductQuantizer& quantizer() const noexcept { return pq_; }
    const std::vector<InvertedList>& lists() const noexcept { return lists_; }

    /// Assigns to the nearest coarse centroid and PQ-encodes the residual.
    IvfPqCode encode(const FaceEmbedding& embedding) const;
    /// Coarse centroid plus decoded residual.
    std::vector<float> reconstruct(const IvfPqCode& code) const;
    /// Asymmetric distance: sqrt of the summed per-subspace squared distances
    /// between the query residual (w.r.t. `list`) and the coded centroids.
    double adc_distance(const FaceEmbedding& query, std::span<const std::uint8_t> code,
                        std::uint32_t list) const;

private:
    void require_trained(const char* op) const;
    void insert_encoded(VectorId id, const float* x);
    void build_term_table();

    IndexConfig config_;
    bool trained_ = false;
    VectorId next_id_ = 0;
    std::vector<float> buffer_;  // pre-training vectors, ids 0..buffered()-1
    std::vector<float> coarse_;  // nlist x 128
    ProductQuantizer pq_;
    std::vector<InvertedList> lists_;
    // ||p||^2 + 2<c_list, p> for every (list, subspace, codeword)
    std::vector<double> term_table_;
    std::vector<double> term_min_;  // per (list, subspace)
};

}  // namespace facegraph
