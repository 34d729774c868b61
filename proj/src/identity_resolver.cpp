#include "facegraph/identity_resolver.hpp"

#include <algorithm>

#include "facegraph/error.hpp"

namespace facegraph {

void ResolveOptions::validate() const {
    if (!(threshold > 0.0)) {
        throw InvalidArgument("threshold must be > 0");
    }
}

IdentityRegistry::IdentityRegistry(const IndexConfig& config) : index_(make_index(config)) {}

IdentityId IdentityRegistry::mint(const FaceEmbedding& embedding, Provenance provenance) {
    const VectorId vid = index_->add(embedding);
    const auto id = static_cast<IdentityId>(canonical_.size());
    if (vid != id) {
        throw Error("index id " + std::to_string(vid) + " out of step with identity " +
                    std::to_string(id));
    }
    canonical_.push_back(embedding);
    provenance_.push_back(std::move(provenance));
    return id;
}

ResolveResult IdentityRegistry::resolve_face(const FaceEmbedding& embedding, double threshold,
                                             Provenance provenance) {
    if (auto hit = index_->search_nearest(embedding, threshold)) {
        return {hit->id, false};
    }
    return {mint(embedding, std::move(provenance)), true};
}

std::optional<IdentityId> IdentityRegistry::lookup(const FaceEmbedding& embedding,
                                                   double threshold) const {
    if (auto hit = index_->search_nearest(embedding, threshold)) return hit->id;
    return std::nullopt;
}

ResolvedImage resolve_image(IdentityRegistry& registry, const ImageRecord& image,
                            const ResolveOptions& options) {
    ResolvedImage out{image.image_id, {}};
    out.identities.reserve(image.faces.size());
    for (std::size_t slot = 0; slot < image.faces.size(); ++slot) {
        const auto& face = image.faces[slot];
        auto result = registry.resolve_face(face, options.threshold, {image.image_id, slot});
        if (options.strict_duplicate_faces && !result.is_new &&
            std::find(out.identities.begin(), out.identities.end(), result.id) != out.identities.end()) {
            result.id = registry.mint(face, {image.image_id, slot});
        }
        out.identities.push_back(result.id);
    }
    return out;
}

Resolution resolve_archive(const ArchiveManifest& manifest, const IndexConfig& config,
                           const ResolveOptions& options) {
    options.validate();
    Resolution res{IdentityRegistry(config), {}};
    res.images.reserve(manifest.image_count());
    for (const auto& image : manifest.images()) {
        res.images.push_back(resolve_image(res.registry, image, options));
    }
    return res;
}

std::vector<std::vector<std::optional<IdentityId>>> lookup_archive(
    const IdentityRegistry& registry, const ArchiveManifest& manifest, double threshold) {
    std::vector<std::vector<std::optional<IdentityId>>> out;
    out.reserve(manifest.image_count());
    for (const auto& image : manifest.images()) {
        auto& ids = out.emplace_back();
        for (const auto& face : image.faces) ids.push_back(registry.lookup(face, threshold));
    }
    return out;
}

}  // namespace facegraph
