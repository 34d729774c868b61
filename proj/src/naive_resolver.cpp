#include "facegraph/naive_resolver.hpp"

#include <cmath>

#include "facegraph/error.hpp"

namespace facegraph {

NaiveResolution naive_resolve(const ArchiveManifest& manifest, double threshold) {
    if (!(threshold > 0.0)) throw InvalidArgument("threshold must be > 0");
    NaiveResolution out;
    for (const auto& image : manifest.images()) {
        ResolvedImage resolved{image.image_id, {}};
        for (const auto& face : image.faces) {
            bool found = false;
            IdentityId best = 0;
            double best_sq = 0.0;
            for (IdentityId id = 0; id < out.canonical.size(); ++id) {
                const double sq = squared_distance(face, out.canonical[id]);
                if (!found || sq < best_sq) {
                    found = true;
                    best = id;
                    best_sq = sq;
                }
            }
            if (found && std::sqrt(best_sq) < threshold) {
                resolved.identities.push_back(best);
            } else {
                resolved.identities.push_back(static_cast<IdentityId>(out.canonical.size()));
                out.canonical.push_back(face);
            }
        }
        out.images.push_back(std::move(resolved));
    }
    return out;
}

}  // namespace facegraph
