#include "facegraph/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "facegraph/error.hpp"

namespace facegraph {

void centroid_distances(std::span<const float> centroids, std::size_t dim,
                        std::span<const float> x, std::span<double> out) {
    const std::size_t k = centroids.size() / dim;
    const float* xp = x.data();
    std::size_t c = 0;
    // Four centroids at a time; each accumulator still sums in coordinate order.
    for (; c + 4 <= k; c += 4) {
        const float* c0 = centroids.data() + c * dim;
        const float* c1 = c0 + dim;
        const float* c2 = c1 + dim;
        const float* c3 = c2 + dim;
        double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double xv = xp[d];
            const double d0 = xv - c0[d], d1 = xv - c1[d], d2 = xv - c2[d], d3 = xv - c3[d];
            s0 += d0 * d0;
            s1 += d1 * d1;
            s2 += d2 * d2;
            s3 += d3 * d3;
        }
        out[c] = s0;
        out[c + 1] = s1;
        out[c + 2] = s2;
        out[c + 3] = s3;
    }
    for (; c < k; ++c) {
        const float* cp = centroids.data() + c * dim;
        double s = 0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = static_cast<double>(xp[d]) - cp[d];
            s += diff * diff;
        }
        out[c] = s;
    }
}

std::uint32_t nearest_centroid(std::span<const float> centroids, std::size_t dim,
                               std::span<const float> x, double* best_sq) {
    const std::size_t k = centroids.size() / dim;
    std::vector<double> dist(k);
    centroid_distances(centroids, dim, x, dist);
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < k; ++c) {
        if (dist[c] < dist[best]) best = c;
    }
    if (best_sq) *best_sq = dist[best];
    return best;
}

namespace {

double sq_dist(const float* a, const float* b, std::size_t dim) {
    double s = 0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double diff = static_cast<double>(a[d]) - b[d];
        s += diff * diff;
    }
    return s;
}

std::vector<float> seed_plus_plus(std::span<const float> data, std::size_t n, std::size_t dim,
                                  std::size_t k, std::mt19937_64& rng) {
    std::vector<float> centroids(k * dim);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::vector<char> chosen(n, 0);

    auto take = [&](std::size_t c, std::size_t idx) {
        chosen[idx] = 1;
        const float* p = data.data() + idx * dim;
        std::copy(p, p + dim, centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(data.data() + i * dim, p, dim));
        }
    };

    take(0, std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    for (std::size_t c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = n;
        if (total > 0.0) {
            double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                pick = i;
                r -= d2[i];
                if (r < 0.0) break;
            }
        }
        if (pick == n) {
            // Every remaining point duplicates a centroid; take an unused one uniformly.
            std::vector<std::size_t> unused;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) unused.push_back(i);
            }
            pick = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
        }
        take(c, pick);
    }
    return centroids;
}

double assign(std::span<const float> data, std::size_t n, std::size_t dim,
              std::span<const float> centroids, std::vector<std::uint32_t>& assignment,
              std::vector<double>& point_sq) {
    const std::size_t k = centroids.size() / dim;
    std::vector<double> dist(k);
    double inertia = 0;
    for (std::size_t i = 0; i < n; ++i) {
        centroid_distances(centroids, dim, data.subspan(i * dim, dim), dist);
        std::uint32_t best = 0;
        for (std::uint32_t c = 1; c < k; ++c) {
            if (dist[c] < dist[best]) best = c;
        }
        assignment[i] = best;
        point_sq[i] = dist[best];
        inertia += dist[best];
    }
    return inertia;
}

void update(std::span<const float> data, std::size_t n, std::size_t dim, std::size_t k,
            std::vector<float>& centroids, std::vector<std::uint32_t>& assignment,
            std::vector<double>& point_sq) {
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t c = assignment[i];
        ++counts[c];
        const float* p = data.data() + i * dim;
        double* s = sums.data() + c * dim;
        for (std::size_t d = 0; d < dim; ++d) s[d] += p[d];
    }

    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        const auto largest = static_cast<std::uint32_t>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
        if (counts[largest] < 2) break;
        std::size_t far = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (assignment[i] == largest && (far == n || point_sq[i] > point_sq[far])) far = i;
        }
        const float* p = data.data() + far * dim;
        double* from = sums.data() + largest * dim;
        double* to = sums.data() + c * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            from[d] -= p[d];
            to[d] = p[d];
        }
        --counts[largest];
        counts[c] = 1;
        assignment[far] = static_cast<std::uint32_t>(c);
        point_sq[far] = 0.0;
    }

    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        const double inv = 1.0 / static_cast<double>(counts[c]);
        for (std::size_t d = 0; d < dim; ++d) {
            centroids[c * dim + d] = static_cast<float>(sums[c * dim + d] * inv);
        }
    }
}

}  // namespace

KMeansResult kmeans(std::span<const float> data, std::size_t dim, std::size_t k,
                    const KMeansOptions& options) {
    if (dim == 0 || k == 0) {
        throw InvalidArgument("k-means needs dim > 0 and k > 0");
    }
    if (data.size() % dim != 0) {
        throw InvalidArgument("k-means data size is not a multiple of dim");
    }
    const std::size_t n = data.size() / dim;
    if (n < k) {
        throw InsufficientTrainingData("k-means needs at least " + std::to_string(k) +
                                       " points, got " + std::to_string(n));
    }

    std::mt19937_64 rng(options.seed);
    KMeansResult result;
    result.centroids = seed_plus_plus(data, n, dim, k, rng);
    result.assignment.assign(n, 0);
    std::vector<double> point_sq(n, 0.0);

    double previous = std::numeric_limits<double>::infinity();
    const std::size_t max_it = std::max<std::size_t>(1, options.max_iterations);
    for (std::size_t it = 0; it < max_it; ++it) {
        const double inertia = assign(data, n, dim, result.centroids, result.assignment, point_sq);
        result.iterations = it + 1;
        if (inertia == 0.0 ||
            (std::isfinite(previous) && (previous - inertia) <= options.tolerance * previous)) {
            result.inertia = inertia;
            return result;
        }
        previous = inertia;
        update(data, n, dim, k, result.centroids, result.assignment, point_sq);
    }
    result.inertia = assign(data, n, dim, result.centroids, result.assignment, point_sq);
    return result;
}

}  // namespace facegraph
