#include "facegraph/vector_index.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <utility>

#include "facegraph/error.hpp"

namespace facegraph {

std::string to_string(Backend backend) {
    return backend == Backend::Flat ? "flat" : "ivfpq";
}

Backend parse_backend(const std::string& name) {
    std::string lower;
    for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "flat") return Backend::Flat;
    if (lower == "ivfpq") return Backend::IvfPq;
    throw InvalidArgument("unknown backend '" + name + "' (expected flat or ivfpq)");
}

std::size_t resolve_nlist(const IndexConfig& config, std::size_t sample_size) {
    if (config.nlist != 0) return config.nlist;
    const std::size_t n = config.expected_size != 0 ? config.expected_size : sample_size;
    return std::max<std::size_t>(1, static_cast<std::size_t>(4.0 * std::sqrt(static_cast<double>(n))));
}

void IndexConfig::validate() const {
    if (m == 0 || kEmbeddingDim % m != 0) {
        throw InvalidArgument("m = " + std::to_string(m) + " must divide " +
                              std::to_string(kEmbeddingDim));
    }
    if (nprobe == 0) {
        throw InvalidArgument("nprobe must be >= 1");
    }
    if (nlist != 0 && nprobe > nlist) {
        throw InvalidArgument("nprobe (" + std::to_string(nprobe) + ") exceeds nlist (" +
                              std::to_string(nlist) + ")");
    }
    if (backend == Backend::IvfPq && buffer_until_trained) {
        const std::size_t need =
            std::max(ProductQuantizer::kCodebookSize, resolve_nlist(*this, train_min));
        if (train_min < need) {
            throw InvalidArgument("train_min (" + std::to_string(train_min) +
                                  ") must be at least max(nlist, 256) = " + std::to_string(need));
        }
    }
    if (kmeans_iterations == 0) {
        throw InvalidArgument("k-means needs at least one iteration");
    }
}

namespace {

void check_threshold(double threshold) {
    if (!(threshold > 0.0)) {
        throw InvalidArgument("search threshold must be > 0");
    }
}

// Inflated so that every squared distance `within_threshold` could accept is scanned.
double search_bound(double threshold) {
    return threshold * threshold * (1.0 + 1e-9);
}

// Nearest row of `base` (n x 128) with squared distance <= bound; ties keep
// the lowest row. Partial sums are checked every 16 coordinates and abandoned
// once they exceed the best so far. Summation order matches squared_distance,
// so the result is the same as a full scan.
std::optional<std::pair<VectorId, double>> exact_nearest(const float* base, std::size_t n,
                                                         const float* q, double bound) {
    double best = bound;
    bool found = false;
    VectorId best_id = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const float* v = base + i * kEmbeddingDim;
        double s = 0.0;
        bool abandoned = false;
        for (std::size_t block = 0; block < kEmbeddingDim; block += 16) {
            for (std::size_t d = block; d < block + 16; ++d) {
                const double diff = static_cast<double>(q[d]) - static_cast<double>(v[d]);
                s += diff * diff;
            }
            if (s > best) {
                abandoned = true;
                break;
            }
        }
        if (abandoned) continue;
        if (!found || s < best) {
            best = s;
            best_id = static_cast<VectorId>(i);
            found = true;
        }
    }
    if (!found) return std::nullopt;
    return std::make_pair(best_id, best);
}

std::optional<SearchHit> finish(std::optional<std::pair<VectorId, double>> best, double threshold) {
    if (!best || !within_threshold(best->second, threshold)) return std::nullopt;
    return SearchHit{best->first, std::sqrt(best->second)};
}

// --- snapshot helpers ------------------------------------------------------

constexpr std::array<char, 4> kMagic{'F', 'G', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
    put<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw IoFailure("truncated index snapshot");
    }
    return v;
}

template <typename T>
std::vector<T> get_vec(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    if (n > (std::uint64_t{1} << 40)) {
        throw IoFailure("corrupt index snapshot (vector length)");
    }
    std::vector<T> v(n);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
        throw IoFailure("truncated index snapshot");
    }
    return v;
}

void write_header(std::ostream& out, const IndexConfig& c) {
    out.write(kMagic.data(), kMagic.size());
    put(out, kVersion);
    put<std::uint8_t>(out, c.backend == Backend::Flat ? 0 : 1);
    put<std::uint64_t>(out, c.nlist);
    put<std::uint64_t>(out, c.expected_size);
    put<std::uint64_t>(out, c.m);
    put<std::uint64_t>(out, c.nprobe);
    put<std::uint64_t>(out, c.train_min);
    put<std::uint8_t>(out, c.buffer_until_trained ? 1 : 0);
    put<std::uint64_t>(out, c.seed);
    put<std::uint64_t>(out, c.kmeans_iterations);
    put<double>(out, c.kmeans_tolerance);
}

IndexConfig read_header(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw IoFailure("not an index snapshot (bad magic)");
    }
    if (get<std::uint32_t>(in) != kVersion) {
        throw IoFailure("unsupported index snapshot version");
    }
    IndexConfig c;
    c.backend = get<std::uint8_t>(in) == 0 ? Backend::Flat : Backend::IvfPq;
    c.nlist = get<std::uint64_t>(in);
    c.expected_size = get<std::uint64_t>(in);
    c.m = get<std::uint64_t>(in);
    c.nprobe = get<std::uint64_t>(in);
    c.train_min = get<std::uint64_t>(in);
    c.buffer_until_trained = get<std::uint8_t>(in) != 0;
    c.seed = get<std::uint64_t>(in);
    c.kmeans_iterations = get<std::uint64_t>(in);
    c.kmeans_tolerance = get<double>(in);
    c.validate();
    return c;
}

}  // namespace

// --- factory -----------------------------------------------------------------

std::unique_ptr<VectorIndex> make_index(const IndexConfig& config) {
    config.validate();
    if (config.backend == Backend::Flat) return std::make_unique<FlatIndex>(config);
    return std::make_unique<IvfPqIndex>(config);
}

std::unique_ptr<VectorIndex> load_index(std::istream& in) {
    IndexConfig config = read_header(in);
    if (config.backend == Backend::Flat) return FlatIndex::load(in, config);
    return IvfPqIndex::load(in, config);
}

// --- FlatIndex ---------------------------------------------------------------

FlatIndex::FlatIndex(IndexConfig config) : config_(config) {
    config_.backend = Backend::Flat;
}

VectorId FlatIndex::add(const FaceEmbedding& embedding) {
    const auto id = static_cast<VectorId>(size());
    data_.insert(data_.end(), embedding.values().begin(), embedding.values().end());
    return id;
}

std::optional<SearchHit> FlatIndex::search_nearest(const FaceEmbedding& query,
                                                   double threshold) const {
    check_threshold(threshold);
    return finish(exact_nearest(data_.data(), size(), query.data(), search_bound(threshold)),
                  threshold);
}

void FlatIndex::save(std::ostream& out) const {
    write_header(out, config_);
    put_vec(out, data_);
    if (!out) throw IoFailure("failed writing index snapshot");
}

std::unique_ptr<FlatIndex> FlatIndex::load(std::istream& in, IndexConfig config) {
    auto index = std::make_unique<FlatIndex>(config);
    index->data_ = get_vec<float>(in);
    if (index->data_.size() % kEmbeddingDim != 0) {
        throw IoFailure("corrupt flat index snapshot");
    }
    return index;
}

// --- IvfPqIndex --------------------------------------------------------------

IvfPqIndex::IvfPqIndex(IndexConfig config) : config_(config), pq_(kEmbeddingDim, config.m) {
    config_.backend = Backend::IvfPq;
    config_.validate();
}

std::size_t IvfPqIndex::nprobe() const noexcept {
    return std::min(config_.nprobe, nlist());
}

void IvfPqIndex::require_trained(const char* op) const {
    if (!trained_) {
        throw UntrainedIndex(std::string(op) + " on an untrained IVFPQ index");
    }
}

void IvfPqIndex::train(std::span<const FaceEmbedding> sample) {
    if (trained_) {
        throw InvalidArgument("IVFPQ index is already trained");
    }
    const std::size_t n = sample.size();
    const std::size_t k = resolve_nlist(config_, n);
    const std::size_t need = std::max(k, ProductQuantizer::kCodebookSize);
    if (n < need) {
        throw InsufficientTrainingData("IVFPQ training needs at least " + std::to_string(need) +
                                       " vectors, got " + std::to_string(n));
    }
    if (config_.nprobe > k && config_.nlist != 0) {
        throw InvalidArgument("nprobe exceeds nlist");
    }

    std::vector<float> data;
    data.reserve(n * kEmbeddingDim);
    for (const auto& e : sample) data.insert(data.end(), e.values().begin(), e.values().end());

    KMeansOptions opts{config_.kmeans_iterations, config_.kmeans_tolerance, config_.seed};
    coarse_ = kmeans(data, kEmbeddingDim, k, opts).centroids;

    std::vector<float> residuals(data.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = std::span<const float>(data).subspan(i * kEmbeddingDim, kEmbeddingDim);
        const auto c = nearest_centroid(coarse_, kEmbeddingDim, x);
        for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
            residuals[i * kEmbeddingDim + d] = x[d] - coarse_[c * kEmbeddingDim + d];
        }
    }
    opts.seed = config_.seed + 0x9e3779b9ULL;
    pq_.train(residuals, opts);

    lists_.assign(k, {});
    build_term_table();
    trained_ = true;

    const std::size_t pending = buffered();
    for (std::size_t i = 0; i < pending; ++i) {
        insert_encoded(static_cast<VectorId>(i), buffer_.data() + i * kEmbeddingDim);
    }
    buffer_.clear();
    buffer_.shrink_to_fit();
}

void IvfPqIndex::build_term_table() {
    const std::size_t k = nlist(), m = pq_.m(), dsub = pq_.dsub();
    constexpr std::size_t K = ProductQuantizer::kCodebookSize;
    term_table_.assign(k * m * K, 0.0);
    term_min_.assign(k * m, 0.0);
    for (std::size_t l = 0; l < k; ++l) {
        const float* c = coarse_.data() + l * kEmbeddingDim;
        for (std::size_t s = 0; s < m; ++s) {
            for (std::size_t j = 0; j < K; ++j) {
                const auto p = pq_.centroid(s, j);
                double norm = 0, dot = 0;
                for (std::size_t d = 0; d < dsub; ++d) {
                    norm += static_cast<double>(p[d]) * p[d];
                    dot += static_cast<double>(c[s * dsub + d]) * p[d];
                }
                term_table_[(l * m + s) * K + j] = norm + 2.0 * dot;
            }
            const double* row = term_table_.data() + (l * m + s) * K;
            term_min_[l * m + s] = *std::min_element(row, row + K);
        }
    }
}

IvfPqCode IvfPqIndex::encode(const FaceEmbedding& embedding) const {
    require_trained("encode");
    IvfPqCode out;
    out.list = nearest_centroid(coarse_, kEmbeddingDim, embedding.values());
    std::array<float, kEmbeddingDim> residual{};
    const float* c = coarse_.data() + out.list * kEmbeddingDim;
    for (std::size_t d = 0; d < kEmbeddingDim; ++d) residual[d] = embedding[d] - c[d];
    out.code.resize(pq_.code_size());
    pq_.encode(residual, out.code);
    return out;
}

std::vector<float> IvfPqIndex::reconstruct(const IvfPqCode& code) const {
    require_trained("reconstruct");
    std::vector<float> x(kEmbeddingDim);
    pq_.decode(code.code, x);
    const float* c = coarse_.data() + code.list * kEmbeddingDim;
    for (std::size_t d = 0; d < kEmbeddingDim; ++d) x[d] += c[d];
    return x;
}

double IvfPqIndex::adc_distance(const FaceEmbedding& query, std::span<const std::uint8_t> code,
                                std::uint32_t list) const {
    require_trained("adc_distance");
    std::array<float, kEmbeddingDim> residual{};
    const float* c = coarse_.data() + list * kEmbeddingDim;
    for (std::size_t d = 0; d < kEmbeddingDim; ++d) residual[d] = query[d] - c[d];
    std::vector<double> table(pq_.m() * ProductQuantizer::kCodebookSize);
    pq_.distance_table(residual, table);
    double sum = 0;
    for (std::size_t s = 0; s < pq_.m(); ++s) {
        sum += table[s * ProductQuantizer::kCodebookSize + code[s]];
    }
    return std::sqrt(sum);
}

void IvfPqIndex::insert_encoded(VectorId id, const float* x) {
    const auto xs = std::span<const float>(x, kEmbeddingDim);
    const auto l = nearest_centroid(coarse_, kEmbeddingDim, xs);
    std::array<float, kEmbeddingDim> residual{};
    const float* c = coarse_.data() + l * kEmbeddingDim;
    for (std::size_t d = 0; d < kEmbeddingDim; ++d) residual[d] = x[d] - c[d];
    auto& list = lists_[l];
    list.ids.push_back(id);
    const std::size_t offset = list.codes.size();
    list.codes.resize(offset + pq_.code_size());
    pq_.encode(residual, std::span<std::uint8_t>(list.codes).subspan(offset, pq_.code_size()));
}

VectorId IvfPqIndex::add(const FaceEmbedding& embedding) {
    if (!trained_) {
        if (!config_.buffer_until_trained) require_trained("add");
        const VectorId id = next_id_++;
        buffer_.insert(buffer_.end(), embedding.values().begin(), embedding.values().end());
        if (buffered() >= config_.train_min) {
            std::vector<FaceEmbedding> sample;
            sample.reserve(buffered());
            for (std::size_t i = 0; i < buffered(); ++i) {
                sample.emplace_back(std::span<const float>(buffer_.data() + i * kEmbeddingDim,
                                                           kEmbeddingDim));
            }
            train(sample);
        }
        return id;
    }
    const VectorId id = next_id_++;
    insert_encoded(id, embedding.data());
    return id;
}

std::optional<SearchHit> IvfPqIndex::search_nearest(const FaceEmbedding& query,
                                                    double threshold) const {
    check_threshold(threshold);
    if (!trained_) {
        if (!config_.buffer_until_trained) require_trained("search");
        return finish(exact_nearest(buffer_.data(), buffered(), query.data(), search_bound(threshold)),
                      threshold);
    }

    const std::size_t k = nlist(), m = pq_.m();
    constexpr std::size_t K = ProductQuantizer::kCodebookSize;

    std::vector<double> coarse_dist(k);
    centroid_distances(coarse_, kEmbeddingDim, query.values(), coarse_dist);
    std::vector<std::uint32_t> order(k);
    for (std::uint32_t i = 0; i < k; ++i) order[i] = i;
    const std::size_t probes = nprobe();
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(probes), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          return coarse_dist[a] < coarse_dist[b] ||
                                 (coarse_dist[a] == coarse_dist[b] && a < b);
                      });

    // ||q - c - p||^2 = ||q - c||^2 + (||p||^2 + 2<c,p>) - 2<q,p>
    std::vector<double> qp(m * K);
    pq_.inner_product_table(query.values(), qp);

    // Candidates are abandoned once the partial sum plus a lower bound on the
    // remaining subspaces exceeds the best so far. The slack covers rounding
    // in that bound, so the winner is the one a full scan would pick.
    constexpr std::size_t kCheckEvery = 8;
    constexpr double kSlack = 1e-9;
    std::vector<double> qp_max(m);
    for (std::size_t sub = 0; sub < m; ++sub) {
        qp_max[sub] = *std::max_element(qp.begin() + static_cast<std::ptrdiff_t>(sub * K),
                                        qp.begin() + static_cast<std::ptrdiff_t>((sub + 1) * K));
    }
    std::vector<double> rest(m + 1);
    double best = search_bound(threshold);
    VectorId best_id = 0;
    bool found = false;
    for (std::size_t p = 0; p < probes; ++p) {
        const std::uint32_t l = order[p];
        const auto& list = lists_[l];
        if (list.ids.empty()) continue;
        const double base = coarse_dist[l];
        const double* term = term_table_.data() + l * m * K;
        rest[m] = 0.0;
        for (std::size_t sub = m; sub-- > 0;) {
            rest[sub] = rest[sub + 1] + term_min_[l * m + sub] - 2.0 * qp_max[sub];
        }
        if (base + rest[0] > best + kSlack) continue;
        for (std::size_t j = 0; j < list.ids.size(); ++j) {
            const std::uint8_t* code = list.codes.data() + j * m;
            double s = base;
            bool abandoned = false;
            for (std::size_t sub = 0; sub < m; ++sub) {
                const std::size_t t = sub * K + code[sub];
                s += term[t] - 2.0 * qp[t];
                if ((sub + 1) % kCheckEvery == 0 && s + rest[sub + 1] > best + kSlack) {
                    abandoned = true;
                    break;
                }
            }
            if (abandoned) continue;
            const VectorId id = list.ids[j];
            if (s < best || (s == best && (!found || id < best_id))) {
                best = s;
                best_id = id;
                found = true;
            }
        }
    }
    if (!found) return std::nullopt;
    return finish(std::make_pair(best_id, std::max(0.0, best)), threshold);
}

void IvfPqIndex::save(std::ostream& out) const {
    write_header(out, config_);
    put<std::uint8_t>(out, trained_ ? 1 : 0);
    put<std::uint32_t>(out, next_id_);
    put_vec(out, buffer_);
    if (trained_) {
        put_vec(out, coarse_);
        put_vec(out, pq_.codebooks());
        put<std::uint64_t>(out, lists_.size());
        for (const auto& list : lists_) {
            put_vec(out, list.ids);
            put_vec(out, list.codes);
        }
    }
    if (!out) throw IoFailure("failed writing index snapshot");
}

std::unique_ptr<IvfPqIndex> IvfPqIndex::load(std::istream& in, IndexConfig config) {
    auto index = std::make_unique<IvfPqIndex>(config);
    index->trained_ = get<std::uint8_t>(in) != 0;
    index->next_id_ = get<std::uint32_t>(in);
    index->buffer_ = get_vec<float>(in);
    if (index->trained_) {
        index->coarse_ = get_vec<float>(in);
        if (index->coarse_.empty() || index->coarse_.size() % kEmbeddingDim != 0) {
            throw IoFailure("corrupt IVFPQ snapshot (centroids)");
        }
        index->pq_.set_codebooks(get_vec<float>(in));
        const auto nl = get<std::uint64_t>(in);
        if (nl != index->nlist()) throw IoFailure("corrupt IVFPQ snapshot (list count)");
        index->lists_.resize(nl);
        for (auto& list : index->lists_) {
            list.ids = get_vec<VectorId>(in);
            list.codes = get_vec<std::uint8_t>(in);
            if (list.codes.size() != list.ids.size() * index->pq_.code_size()) {
                throw IoFailure("corrupt IVFPQ snapshot (codes)");
            }
        }
        index->build_term_table();
    }
    return index;
}

}  // namespace facegraph
