#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "facegraph/embedding.hpp"
#include "facegraph/manifest.hpp"

namespace facegraph {

/// Planted-identity archive parameters. Every face is its identity's anchor
/// plus noise of norm at most `noise_radius`; anchors are pairwise at least
/// `separation` apart, so with 2r < threshold <= separation - 2r the planted
/// labels are exactly what a threshold resolver must recover.
struct SyntheticSpec {
    std::size_t identity_count = 10;
    std::size_t images = 100;
    std::size_t min_faces = 1;  // per image, uniform in [min_faces, max_faces]
    std::size_t max_faces = 4;
    double noise_radius = 0.2;
    double separation = 1.2;
    double threshold = kDefaultMatchThreshold;
    /// Per-coordinate standard deviation of anchors; 0 picks one so typical
    /// anchor distances are 1.5x the separation.
    double anchor_scale = 0.0;
    /// Rejection-sampling budget per anchor before giving up.
    std::size_t max_attempts = 1000;
    std::uint64_t seed = 1;

    /// Throws InvalidArgument on inconsistent parameters.
    void validate() const;
};

struct SyntheticArchive {
    ArchiveManifest manifest;
    std::vector<std::vector<std::uint32_t>> labels;  // planted identity per face, per image
    std::vector<FaceEmbedding> anchors;

    /// Number of planted identities that actually appear.
    std::size_t distinct_labels() const;
};

/// Images draw distinct identities; identities not yet used are preferred, so
/// every identity appears once the face budget allows. Deterministic per seed.
/// Throws InfeasibleSpec when the anchors cannot be placed.
SyntheticArchive generate_synthetic_archive(const SyntheticSpec& spec);

/// Agreement between two labelings of the same faces (per image, per slot).
/// Each label of `a` is matched to its most frequent label in `b` and vice
/// versa; a face agrees when both matches point at each other. Splits and
/// merges both count against agreement. Returns a fraction in [0, 1]
/// (1 for zero faces).
double labeling_agreement(std::span<const std::vector<std::uint32_t>> a,
                          std::span<const std::vector<std::uint32_t>> b);

}  // namespace facegraph
