#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "facegraph/graph_builder.hpp"

namespace facegraph {

using CommunityId = std::uint32_t;
using Assignment = std::map<IdentityId, CommunityId>;

struct LouvainOptions {
    /// 0 visits nodes in ascending id order; any other value shuffles the
    /// visit order with this seed.
    std::uint64_t seed = 0;
    double resolution = 1.0;
    /// Use co-occurrence counts as edge weights; false treats every edge as weight 1.
    bool weighted = true;
};

struct Partition {
    Assignment assignment;  // every graph node -> dense community id
    double modularity = 0.0;
    /// Modularity after each aggregation level, in order.
    std::vector<double> level_modularity;

    std::size_t community_count() const;
};

/// Weighted modularity with resolution gamma:
///   Q = sum_c [ in_c / 2m - gamma * (tot_c / 2m)^2 ]
/// in_c counts both directions of each internal edge. Throws InvalidArgument
/// when a graph node has no community.
double modularity(const CoOccurrenceGraph& graph, const Assignment& assignment,
                  double resolution = 1.0, bool weighted = true);

/// Louvain method: local moving until no node improves modularity, then
/// aggregation of communities into nodes, repeated until a level brings no
/// gain. Community ids are numbered by their smallest member identity.
/// Throws EmptyGraph when the graph has no nodes.
Partition louvain(const CoOccurrenceGraph& graph, const LouvainOptions& options = {});

struct CommunityStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::size_t community_count = 0;
    std::size_t two_node_communities = 0;
    std::size_t largest_size = 0;
    double largest_fraction = 0.0;
    std::map<std::size_t, std::size_t> size_histogram;  // size -> number of communities
    std::vector<std::vector<IdentityId>> members;        // indexed by community id
};

CommunityStats community_stats(const Partition& partition, const CoOccurrenceGraph& graph);

struct NodeDegree {
    IdentityId id = 0;
    std::size_t degree = 0;
    std::size_t strength = 0;  // sum of incident edge weights
    double centrality = 0.0;   // degree / (n - 1)
};

/// Per node, ascending id.
std::vector<NodeDegree> degree_centrality(const CoOccurrenceGraph& graph);

}  // namespace facegraph
