#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace facegraph {

struct KMeansOptions {
    std::size_t max_iterations = 25;
    /// Stop once the relative inertia decrease between iterations drops below this.
    double tolerance = 1e-4;
    std::uint64_t seed = 1;
};

struct KMeansResult {
    std::vector<float> centroids;          // k x dim, row-major
    std::vector<std::uint32_t> assignment;  // one entry per input point
    double inertia = 0.0;                   // sum of squared distances to assigned centroid
    std::size_t iterations = 0;
};

/// Lloyd's k-means with k-means++ seeding. Empty clusters are repaired by
/// splitting the largest cluster: the empty centroid takes that cluster's
/// farthest member. Deterministic for a given seed.
///
/// `data` holds n x dim row-major points. Throws InsufficientTrainingData
/// when n < k, InvalidArgument when k == 0 or dim == 0.
KMeansResult kmeans(std::span<const float> data, std::size_t dim, std::size_t k,
                    const KMeansOptions& options = {});

/// Exact nearest centroid by squared L2 (double accumulation, coordinate order).
/// Ties go to the lowest centroid index. Writes the squared distance to `best_sq`
/// when non-null.
std::uint32_t nearest_centroid(std::span<const float> centroids, std::size_t dim,
                               std::span<const float> x, double* best_sq = nullptr);

/// Squared distances from `x` to every centroid, same accumulation order as
/// `nearest_centroid`. `out` must hold k entries.
void centroid_distances(std::span<const float> centroids, std::size_t dim,
                        std::span<const float> x, std::span<double> out);

}  // namespace facegraph
