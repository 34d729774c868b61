#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "facegraph/error.hpp"
#include "facegraph/kmeans.hpp"
#include "facegraph/product_quantizer.hpp"

using namespace facegraph;

namespace {

double sq(const float* a, const float* b, std::size_t dim) {
    double s = 0;
    for (std::size_t i = 0; i < dim; ++i) s += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
    return s;
}

// Smallest over all matchings of the largest matched distance (brute force over permutations).
double best_matching_max_distance(const std::vector<float>& found, const std::vector<float>& truth,
                                  std::size_t k, std::size_t dim) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double worst = 0;
        for (std::size_t i = 0; i < k; ++i) {
            worst = std::max(worst, std::sqrt(sq(&found[perm[i] * dim], &truth[i * dim], dim)));
        }
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::vector<float> gaussian(std::size_t n, std::size_t dim, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<float> v(n * dim);
    for (auto& x : v) x = static_cast<float>(nd(rng));
    return v;
}

}  // namespace

TEST_CASE("k equal to n puts a centroid on every point") {
    std::mt19937_64 rng(2);
    const std::size_t n = 12, dim = 16;
    const auto data = gaussian(n, dim, 1.0, rng);
    const auto res = kmeans(data, dim, n);
    std::vector<bool> hit(n, false);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            if (sq(&res.centroids[c * dim], &data[i * dim], dim) < 1e-12) hit[i] = true;
        }
    }
    CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
    CHECK(res.inertia == doctest::Approx(0.0));
}

TEST_CASE("same data and seed give bit-identical centroids") {
    std::mt19937_64 rng(9);
    const auto data = gaussian(500, 8, 1.0, rng);
    const auto a = kmeans(data, 8, 10, {25, 1e-4, 77});
    const auto b = kmeans(data, 8, 10, {25, 1e-4, 77});
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("well-separated blobs are recovered within 0.1") {
    std::mt19937_64 rng(4);
    const std::size_t k = 6, dim = 128, per = 300;
    const auto means = gaussian(k, dim, 1.0, rng);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<float> data;
    for (std::size_t i = 0; i < k * per; ++i) {
        const std::size_t c = i % k;
        for (std::size_t d = 0; d < dim; ++d) data.push_back(static_cast<float>(means[c * dim + d] + noise(rng)));
    }
    const auto res = kmeans(data, dim, k, {25, 1e-4, 1});
    CHECK(best_matching_max_distance(res.centroids, means, k, dim) < 0.1);
}

TEST_CASE("assignment is the exact nearest centroid") {
    std::mt19937_64 rng(8);
    const auto data = gaussian(400, 4, 1.0, rng);
    const auto res = kmeans(data, 4, 7);
    for (std::size_t i = 0; i < 400; ++i) {
        std::size_t best = 0;
        double bd = 1e300;
        for (std::size_t c = 0; c < 7; ++c) {
            const double d = sq(&data[i * 4], &res.centroids[c * 4], 4);
            if (d < bd) bd = d, best = c;
        }
        CHECK(res.assignment[i] == best);
    }
}

TEST_CASE("empty clusters are repaired") {
    // Many duplicates of one point plus a few others: k-means++ can still only
    // seed distinct locations, the rest must come from repair.
    std::vector<float> data;
    for (int i = 0; i < 50; ++i) data.push_back(0.f);
    for (int i = 0; i < 5; ++i) data.push_back(static_cast<float>(10 + i));
    const auto res = kmeans(data, 1, 6);
    std::vector<std::size_t> counts(6, 0);
    for (auto a : res.assignment) ++counts[a];
    CHECK(std::count(counts.begin(), counts.end(), 0u) == 0);
}

TEST_CASE("k-means argument errors") {
    std::vector<float> data(10, 0.f);
    CHECK_THROWS_AS(kmeans(data, 2, 6), InsufficientTrainingData);
    CHECK_THROWS_AS(kmeans(data, 2, 0), InvalidArgument);
    CHECK_THROWS_AS(kmeans(data, 3, 1), InvalidArgument);
}

TEST_CASE("product quantizer encode, decode and tables") {
    std::mt19937_64 rng(12);
    const std::size_t dim = 128, m = 8;
    const auto data = gaussian(1000, dim, 0.2, rng);
    ProductQuantizer pq(dim, m);
    CHECK_THROWS_AS(ProductQuantizer(dim, 7), InvalidArgument);
    CHECK_THROWS_AS(pq.train(std::span<const float>(data).first(255 * dim), {}), InsufficientTrainingData);
    pq.train(data, {10, 1e-4, 3});
    REQUIRE(pq.trained());

    std::vector<std::uint8_t> code(m);
    std::vector<float> rec(dim);
    std::vector<double> table(m * 256), ip(m * 256);
    for (std::size_t i = 0; i < 50; ++i) {
        const auto x = std::span<const float>(data).subspan(i * dim, dim);
        pq.encode(x, code);
        pq.decode(code, rec);
        // encode picks the nearest sub-centroid per subspace
        for (std::size_t s = 0; s < m; ++s) {
            double best = 1e300;
            for (std::size_t k = 0; k < 256; ++k) {
                best = std::min(best, sq(x.data() + s * 16, pq.centroid(s, k).data(), 16));
            }
            CHECK(sq(x.data() + s * 16, rec.data() + s * 16, 16) == doctest::Approx(best).epsilon(1e-12));
        }
        const auto q = std::span<const float>(data).subspan((i + 500) * dim, dim);
        pq.distance_table(q, table);
        pq.inner_product_table(q, ip);
        double adc = 0;
        for (std::size_t s = 0; s < m; ++s) adc += table[s * 256 + code[s]];
        CHECK(std::sqrt(adc) == doctest::Approx(std::sqrt(sq(q.data(), rec.data(), dim))).epsilon(1e-5));
        double dot = 0;
        for (std::size_t d = 0; d < 16; ++d) dot += double(q[d]) * pq.centroid(0, code[0])[d];
        CHECK(ip[code[0]] == doctest::Approx(dot).epsilon(1e-12));
    }
}

TEST_CASE("zero distance table when codebooks contain the query") {
    const std::size_t dim = 128, m = 8, dsub = 16;
    std::mt19937_64 rng(1);
    std::vector<float> books = gaussian(m * 256, dsub, 1.0, rng);
    const auto q = gaussian(1, dim, 1.0, rng);
    std::vector<std::uint8_t> chosen(m);
    for (std::size_t s = 0; s < m; ++s) {
        chosen[s] = static_cast<std::uint8_t>((s * 37 + 5) % 256);
        std::copy_n(q.begin() + s * dsub, dsub, books.begin() + (s * 256 + chosen[s]) * dsub);
    }
    ProductQuantizer pq(dim, m);
    pq.set_codebooks(books);
    std::vector<double> table(m * 256);
    pq.distance_table(q, table);
    double adc = 0;
    for (std::size_t s = 0; s < m; ++s) adc += table[s * 256 + chosen[s]];
    CHECK(adc == 0.0);
    std::vector<std::uint8_t> code(m);
    pq.encode(q, code);
    CHECK(code == chosen);
}
