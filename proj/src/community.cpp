#include "facegraph/community.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#include "facegraph/error.hpp"

namespace facegraph {

std::size_t Partition::community_count() const {
    CommunityId top = 0;
    bool any = false;
    for (const auto& [node, c] : assignment) {
        top = std::max(top, c);
        any = true;
    }
    return any ? static_cast<std::size_t>(top) + 1 : 0;
}

double modularity(const CoOccurrenceGraph& graph, const Assignment& assignment, double resolution,
                  bool weighted) {
    for (IdentityId id : graph.nodes()) {
        if (assignment.find(id) == assignment.end()) {
            throw InvalidArgument("identity " + std::to_string(id) + " has no community");
        }
    }
    std::unordered_map<CommunityId, double> internal, total;
    double m2 = 0.0;
    for (const auto& e : graph.edges()) {
        const double w = weighted ? static_cast<double>(e.weight()) : 1.0;
        const CommunityId ca = assignment.at(e.a), cb = assignment.at(e.b);
        total[ca] += w;
        total[cb] += w;
        if (ca == cb) internal[ca] += 2.0 * w;
        m2 += 2.0 * w;
    }
    if (m2 == 0.0) return 0.0;
    double q = 0.0;
    for (const auto& [c, tot] : total) {
        const auto in = internal.find(c);
        const double in_c = in == internal.end() ? 0.0 : in->second;
        q += in_c / m2 - resolution * (tot / m2) * (tot / m2);
    }
    return q;
}

namespace {

// Compressed adjacency for one Louvain level. Self-loop weights are stored in
// ordered-pair units (both directions of every collapsed internal edge), so
// node degrees and the total 2m are preserved across aggregation.
struct LevelGraph {
    std::size_t n = 0;
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> neighbors;
    std::vector<double> weights;
    std::vector<double> self_loops;
    std::vector<double> degree;
    double m2 = 0.0;
};

LevelGraph from_adjacency(std::vector<std::map<std::uint32_t, double>> adj,
                          std::vector<double> self_loops) {
    LevelGraph g;
    g.n = adj.size();
    g.offsets.assign(g.n + 1, 0);
    g.self_loops = std::move(self_loops);
    g.degree.assign(g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        g.offsets[i + 1] = g.offsets[i] + adj[i].size();
        double d = g.self_loops[i];
        for (const auto& [j, w] : adj[i]) {
            g.neighbors.push_back(j);
            g.weights.push_back(w);
            d += w;
        }
        g.degree[i] = d;
        g.m2 += d;
    }
    return g;
}

LevelGraph base_level(const CoOccurrenceGraph& graph, bool weighted) {
    const auto& nodes = graph.nodes();
    auto index_of = [&](IdentityId id) {
        return static_cast<std::uint32_t>(std::lower_bound(nodes.begin(), nodes.end(), id) -
                                          nodes.begin());
    };
    std::vector<std::map<std::uint32_t, double>> adj(nodes.size());
    for (const auto& e : graph.edges()) {
        const double w = weighted ? static_cast<double>(e.weight()) : 1.0;
        const auto a = index_of(e.a), b = index_of(e.b);
        adj[a][b] += w;
        adj[b][a] += w;
    }
    return from_adjacency(std::move(adj), std::vector<double>(nodes.size(), 0.0));
}

double level_quality(const LevelGraph& g, const std::vector<std::uint32_t>& comm, double gamma) {
    std::vector<double> in(g.n, 0.0), tot(g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto c = comm[i];
        tot[c] += g.degree[i];
        in[c] += g.self_loops[i];
        for (std::size_t p = g.offsets[i]; p < g.offsets[i + 1]; ++p) {
            if (comm[g.neighbors[p]] == c) in[c] += g.weights[p];
        }
    }
    double q = 0.0;
    for (std::size_t c = 0; c < g.n; ++c) {
        if (tot[c] == 0.0) continue;
        q += in[c] / g.m2 - gamma * (tot[c] / g.m2) * (tot[c] / g.m2);
    }
    return q;
}

// Local moving phase. Returns true if any node changed community.
bool move_nodes(const LevelGraph& g, std::vector<std::uint32_t>& comm,
                const std::vector<std::uint32_t>& order, double gamma) {
    comm.resize(g.n);
    std::iota(comm.begin(), comm.end(), 0u);
    std::vector<double> tot = g.degree;
    std::vector<double> link(g.n, -1.0);
    std::vector<std::uint32_t> touched;
    // Gains are in edge-weight units; ignore improvements at rounding level.
    const double min_gain = 1e-12 * g.m2;

    bool any = false;
    for (std::size_t pass = 0; pass < 10000; ++pass) {
        std::size_t moves = 0;
        for (const std::uint32_t i : order) {
            const std::uint32_t from = comm[i];
            touched.clear();
            link[from] = 0.0;
            touched.push_back(from);
            for (std::size_t p = g.offsets[i]; p < g.offsets[i + 1]; ++p) {
                const std::uint32_t c = comm[g.neighbors[p]];
                if (link[c] < 0.0) {
                    link[c] = 0.0;
                    touched.push_back(c);
                }
                link[c] += g.weights[p];
            }

            const double k = g.degree[i];
            tot[from] -= k;
            std::uint32_t best = from;
            double best_gain = link[from] - gamma * tot[from] * k / g.m2;
            for (const std::uint32_t c : touched) {
                const double gain = link[c] - gamma * tot[c] * k / g.m2;
                if (gain > best_gain + min_gain) {
                    best = c;
                    best_gain = gain;
                }
            }
            tot[best] += k;
            comm[i] = best;
            if (best != from) ++moves;
            for (const std::uint32_t c : touched) link[c] = -1.0;
        }
        if (moves == 0) break;
        any = true;
    }
    return any;
}

// Dense relabel in order of first appearance; returns the community count.
std::size_t renumber(std::vector<std::uint32_t>& comm) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    for (auto& c : comm) {
        auto [it, inserted] = remap.try_emplace(c, static_cast<std::uint32_t>(remap.size()));
        c = it->second;
    }
    return remap.size();
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<std::uint32_t>& comm, std::size_t count) {
    std::vector<std::map<std::uint32_t, double>> adj(count);
    std::vector<double> self(count, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto ci = comm[i];
        self[ci] += g.self_loops[i];
        for (std::size_t p = g.offsets[i]; p < g.offsets[i + 1]; ++p) {
            const auto cj = comm[g.neighbors[p]];
            if (ci == cj) {
                self[ci] += g.weights[p];
            } else {
                adj[ci][cj] += g.weights[p];
            }
        }
    }
    return from_adjacency(std::move(adj), std::move(self));
}

}  // namespace

Partition louvain(const CoOccurrenceGraph& graph, const LouvainOptions& options) {
    if (graph.node_count() == 0) {
        throw EmptyGraph("community detection needs at least one node");
    }
    if (!(options.resolution > 0.0)) {
        throw InvalidArgument("resolution must be > 0");
    }
    const double gamma = options.resolution;
    std::mt19937_64 rng(options.seed);

    LevelGraph level = base_level(graph, options.weighted);
    std::vector<std::uint32_t> membership(level.n);
    std::iota(membership.begin(), membership.end(), 0u);

    Partition result;
    std::vector<std::uint32_t> singletons(level.n);
    std::iota(singletons.begin(), singletons.end(), 0u);
    double current = level_quality(level, singletons, gamma);
    result.level_modularity.push_back(current);

    std::vector<std::uint32_t> comm;
    while (true) {
        std::vector<std::uint32_t> order(level.n);
        std::iota(order.begin(), order.end(), 0u);
        if (options.seed != 0) std::shuffle(order.begin(), order.end(), rng);

        if (!move_nodes(level, comm, order, gamma)) break;
        const std::size_t count = renumber(comm);
        const double q = level_quality(level, comm, gamma);
        if (!(q > current)) break;

        for (auto& m : membership) m = comm[m];
        result.level_modularity.push_back(q);
        current = q;
        if (count == level.n) break;
        level = aggregate(level, comm, count);
    }

    // Community ids ordered by smallest member identity (nodes are ascending).
    const auto& nodes = graph.nodes();
    std::unordered_map<std::uint32_t, CommunityId> dense;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto [it, inserted] = dense.try_emplace(membership[i], static_cast<CommunityId>(dense.size()));
        result.assignment[nodes[i]] = it->second;
    }
    result.modularity = modularity(graph, result.assignment, gamma, options.weighted);
    return result;
}

CommunityStats community_stats(const Partition& partition, const CoOccurrenceGraph& graph) {
    CommunityStats s;
    s.node_count = graph.node_count();
    s.edge_count = graph.edge_count();
    s.community_count = partition.community_count();
    s.members.assign(s.community_count, {});
    for (const auto& [node, c] : partition.assignment) s.members[c].push_back(node);
    for (const auto& m : s.members) {
        ++s.size_histogram[m.size()];
        if (m.size() == 2) ++s.two_node_communities;
        s.largest_size = std::max(s.largest_size, m.size());
    }
    if (s.node_count != 0) {
        s.largest_fraction = static_cast<double>(s.largest_size) / static_cast<double>(s.node_count);
    }
    return s;
}

std::vector<NodeDegree> degree_centrality(const CoOccurrenceGraph& graph) {
    const auto& nodes = graph.nodes();
    std::vector<NodeDegree> out(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i].id = nodes[i];
    auto slot = [&](IdentityId id) -> NodeDegree& {
        return out[static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), id) -
                                            nodes.begin())];
    };
    for (const auto& e : graph.edges()) {
        for (IdentityId v : {e.a, e.b}) {
            auto& d = slot(v);
            ++d.degree;
            d.strength += e.weight();
        }
    }
    const double denom = nodes.size() > 1 ? static_cast<double>(nodes.size() - 1) : 1.0;
    for (auto& d : out) d.centrality = static_cast<double>(d.degree) / denom;
    return out;
}

}  // namespace facegraph
