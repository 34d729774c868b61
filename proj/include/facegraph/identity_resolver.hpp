#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "facegraph/embedding.hpp"
#include "facegraph/manifest.hpp"
#include "facegraph/vector_index.hpp"

namespace facegraph {

using IdentityId = std::uint32_t;

/// Where an identity was first seen.
struct Provenance {
    std::string image_id;
    std::size_t slot = 0;

    bool operator==(const Provenance&) const = default;
};

struct ResolveResult {
    IdentityId id = 0;
    bool is_new = false;
};

struct ResolvedImage {
    std::string image_id;
    std::vector<IdentityId> identities;  // one per face slot

    bool operator==(const ResolvedImage&) const = default;
};

struct ResolveOptions {
    double threshold = kDefaultMatchThreshold;
    /// Force a second face in the same image onto a new identity instead of
    /// reusing one already present in that image.
    bool strict_duplicate_faces = false;

    void validate() const;
};

/// Known identities and the index over their canonical embeddings. The
/// canonical embedding is the first face seen for the identity and never
/// changes; identity ids equal index vector ids.
class IdentityRegistry {
public:
    explicit IdentityRegistry(const IndexConfig& config);

    /// Matches `embedding` against known identities; on a miss, mints a new one.
    ResolveResult resolve_face(const FaceEmbedding& embedding, double threshold,
                               Provenance provenance = {});

    /// Read-only match against the current registry.
    std::optional<IdentityId> lookup(const FaceEmbedding& embedding, double threshold) const;

    /// Unconditionally mints a new identity.
    IdentityId mint(const FaceEmbedding& embedding, Provenance provenance);

    std::size_t size() const noexcept { return canonical_.size(); }
    const FaceEmbedding& canonical(IdentityId id) const { return canonical_.at(id); }
    const Provenance& provenance(IdentityId id) const { return provenance_.at(id); }
    const VectorIndex& index() const noexcept { return *index_; }

private:
    std::unique_ptr<VectorIndex> index_;
    std::vector<FaceEmbedding> canonical_;
    std::vector<Provenance> provenance_;
};

/// Resolves one image's faces in slot order.
ResolvedImage resolve_image(IdentityRegistry& registry, const ImageRecord& image,
                            const ResolveOptions& options);

struct Resolution {
    IdentityRegistry registry;
    std::vector<ResolvedImage> images;  // one per manifest image, manifest order
};

/// Streams the manifest in order: each face either matches a known identity
/// or founds a new one.
Resolution resolve_archive(const ArchiveManifest& manifest, const IndexConfig& config,
                           const ResolveOptions& options = {});

/// Re-resolves every face against a finished registry without modifying it.
/// Unmatched faces yield std::nullopt.
std::vector<std::vector<std::optional<IdentityId>>> lookup_archive(
    const IdentityRegistry& registry, const ArchiveManifest& manifest, double threshold);

}  // namespace facegraph
