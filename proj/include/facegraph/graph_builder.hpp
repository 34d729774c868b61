#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "facegraph/identity_resolver.hpp"

namespace facegraph {

/// One co-occurrence of two distinct identities in one image; a < b.
struct EdgeRecord {
    IdentityId a = 0;
    IdentityId b = 0;
    std::string image_id;

    bool operator==(const EdgeRecord&) const = default;
};

/// Emits every pair of distinct identities per image. Duplicate identities
/// within an image are collapsed first, so no self-loops and no doubled pairs.
/// Records come out image by image, pairs in ascending (a, b) order.
std::vector<EdgeRecord> build_edgelist(std::span<const ResolvedImage> resolved);

/// Weighted undirected simple graph over identities. Edge weight is the
/// number of distinct images in which the pair co-occurs.
class CoOccurrenceGraph {
public:
    struct Edge {
        IdentityId a = 0;
        IdentityId b = 0;
        std::vector<std::string> images;  // first-seen order, no duplicates

        std::size_t weight() const noexcept { return images.size(); }
    };

    /// Sorted by (a, b).
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    /// Identities with degree >= 1, ascending.
    const std::vector<IdentityId>& nodes() const noexcept { return nodes_; }
    /// Registry identities without any edge; empty when the registry size is unknown.
    const std::vector<IdentityId>& isolates() const noexcept { return isolates_; }
    std::optional<std::size_t> registry_size() const noexcept { return registry_size_; }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    /// Sum of edge weights (the number of parallel co-occurrence records).
    std::size_t total_weight() const noexcept;

    const Edge* find(IdentityId a, IdentityId b) const;
    bool knows_image(const std::string& image_id) const { return images_.count(image_id) != 0; }

    friend CoOccurrenceGraph aggregate_graph(std::span<const EdgeRecord> edgelist,
                                             std::optional<std::size_t> registry_size,
                                             std::span<const std::string> known_images);

private:
    std::vector<Edge> edges_;
    std::vector<IdentityId> nodes_;
    std::vector<IdentityId> isolates_;
    std::optional<std::size_t> registry_size_;
    std::unordered_set<std::string> images_;
};

/// Merges parallel records into weighted edges. When `registry_size` is given,
/// identities outside the node set become isolates (and ids beyond it are
/// rejected). `known_images` registers images that took part in resolution
/// but produced no edges.
CoOccurrenceGraph aggregate_graph(std::span<const EdgeRecord> edgelist,
                                  std::optional<std::size_t> registry_size = std::nullopt,
                                  std::span<const std::string> known_images = {});

/// build_edgelist + aggregate_graph, registering every resolved image.
CoOccurrenceGraph build_graph(std::span<const ResolvedImage> resolved, std::size_t registry_size);

struct EdgeShare {
    std::size_t edges = 0;
    double fraction = 0.0;  // of all unique edges
};

/// Unique edges whose image list contains `image_id`. Throws UnknownImage for
/// images the graph has never seen.
EdgeShare image_edge_share(const CoOccurrenceGraph& graph, const std::string& image_id);

/// Images ranked by edge share, descending; ties by image id.
std::vector<std::pair<std::string, EdgeShare>> top_images_by_edge_share(
    const CoOccurrenceGraph& graph, std::size_t limit);

}  // namespace facegraph
