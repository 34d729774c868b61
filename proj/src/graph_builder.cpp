#include "facegraph/graph_builder.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "facegraph/error.hpp"

namespace facegraph {

std::vector<EdgeRecord> build_edgelist(std::span<const ResolvedImage> resolved) {
    std::vector<EdgeRecord> out;
    std::vector<IdentityId> ids;
    for (const auto& image : resolved) {
        ids = image.identities;
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        if (ids.size() < 2) continue;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                out.push_back({ids[i], ids[j], image.image_id});
            }
        }
    }
    return out;
}

std::size_t CoOccurrenceGraph::total_weight() const noexcept {
    std::size_t w = 0;
    for (const auto& e : edges_) w += e.weight();
    return w;
}

const CoOccurrenceGraph::Edge* CoOccurrenceGraph::find(IdentityId a, IdentityId b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(a, b),
                               [](const Edge& e, const std::pair<IdentityId, IdentityId>& key) {
                                   return std::make_pair(e.a, e.b) < key;
                               });
    if (it == edges_.end() || it->a != a || it->b != b) return nullptr;
    return &*it;
}

CoOccurrenceGraph aggregate_graph(std::span<const EdgeRecord> edgelist,
                                  std::optional<std::size_t> registry_size,
                                  std::span<const std::string> known_images) {
    CoOccurrenceGraph g;
    g.registry_size_ = registry_size;

    std::map<std::pair<IdentityId, IdentityId>, std::vector<std::string>> merged;
    for (const auto& rec : edgelist) {
        if (rec.a == rec.b) {
            throw InvalidArgument("self-loop edge record for identity " + std::to_string(rec.a));
        }
        const IdentityId a = std::min(rec.a, rec.b), b = std::max(rec.a, rec.b);
        if (registry_size && b >= *registry_size) {
            throw InvalidArgument("edge references identity " + std::to_string(b) +
                                  " outside a registry of " + std::to_string(*registry_size));
        }
        auto& images = merged[{a, b}];
        if (std::find(images.begin(), images.end(), rec.image_id) == images.end()) {
            images.push_back(rec.image_id);
        }
        g.images_.insert(rec.image_id);
    }
    for (const auto& img : known_images) g.images_.insert(img);

    std::vector<IdentityId> nodes;
    g.edges_.reserve(merged.size());
    for (auto& [key, images] : merged) {
        g.edges_.push_back({key.first, key.second, std::move(images)});
        nodes.push_back(key.first);
        nodes.push_back(key.second);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    g.nodes_ = std::move(nodes);

    if (registry_size) {
        std::size_t j = 0;
        for (IdentityId id = 0; id < *registry_size; ++id) {
            while (j < g.nodes_.size() && g.nodes_[j] < id) ++j;
            if (j < g.nodes_.size() && g.nodes_[j] == id) continue;
            g.isolates_.push_back(id);
        }
    }
    return g;
}

CoOccurrenceGraph build_graph(std::span<const ResolvedImage> resolved, std::size_t registry_size) {
    std::vector<std::string> images;
    images.reserve(resolved.size());
    for (const auto& r : resolved) images.push_back(r.image_id);
    const auto edges = build_edgelist(resolved);
    return aggregate_graph(edges, registry_size, images);
}

EdgeShare image_edge_share(const CoOccurrenceGraph& graph, const std::string& image_id) {
    if (!graph.knows_image(image_id)) {
        throw UnknownImage("image '" + image_id + "' is not part of this graph");
    }
    EdgeShare share;
    for (const auto& e : graph.edges()) {
        if (std::find(e.images.begin(), e.images.end(), image_id) != e.images.end()) ++share.edges;
    }
    if (graph.edge_count() != 0) {
        share.fraction = static_cast<double>(share.edges) / static_cast<double>(graph.edge_count());
    }
    return share;
}

std::vector<std::pair<std::string, EdgeShare>> top_images_by_edge_share(
    const CoOccurrenceGraph& graph, std::size_t limit) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& e : graph.edges()) {
        for (const auto& img : e.images) ++counts[img];
    }
    std::vector<std::pair<std::string, EdgeShare>> out;
    out.reserve(counts.size());
    const double total = static_cast<double>(graph.edge_count());
    for (const auto& [img, n] : counts) {
        out.push_back({img, {n, static_cast<double>(n) / total}});
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.second.edges != y.second.edges ? x.second.edges > y.second.edges : x.first < y.first;
    });
    if (out.size() > limit) out.resize(limit);
    return out;
}

}  // namespace facegraph
