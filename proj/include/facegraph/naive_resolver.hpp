#pragma once

#include <vector>

#include "facegraph/identity_resolver.hpp"
#include "facegraph/manifest.hpp"

namespace facegraph {

struct NaiveResolution {
    std::vector<FaceEmbedding> canonical;
    std::vector<ResolvedImage> images;
};

/// Quadratic reference resolver: a plain loop over every canonical vector for
/// every face, no index. Serves as the scaling baseline and as the oracle for
/// the indexed resolver.
NaiveResolution naive_resolve(const ArchiveManifest& manifest,
                              double threshold = kDefaultMatchThreshold);

}  // namespace facegraph
