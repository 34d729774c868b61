#include <doctest.h>

#include <functional>
#include <map>
#include <random>
#include <set>

#include "facegraph/community.hpp"
#include "facegraph/error.hpp"
#include "facegraph/graph_builder.hpp"

using namespace facegraph;

namespace {

struct WEdge {
    IdentityId a, b;
    std::size_t w;
};

CoOccurrenceGraph make_graph(const std::vector<WEdge>& edges) {
    std::vector<EdgeRecord> recs;
    for (const auto& e : edges) {
        for (std::size_t k = 0; k < e.w; ++k) {
            recs.push_back({e.a, e.b, "e" + std::to_string(e.a) + "_" + std::to_string(e.b) + "_" + std::to_string(k)});
        }
    }
    return aggregate_graph(recs);
}

// Q = 1/(2m) sum_ij [A_ij - gamma k_i k_j / 2m] delta(c_i, c_j), straight from the definition.
double reference_q(const CoOccurrenceGraph& g, const Assignment& c, double gamma = 1.0, bool weighted = true) {
    std::map<IdentityId, std::map<IdentityId, double>> A;
    std::map<IdentityId, double> k;
    double m2 = 0;
    for (const auto& e : g.edges()) {
        const double w = weighted ? static_cast<double>(e.weight()) : 1.0;
        A[e.a][e.b] += w;
        A[e.b][e.a] += w;
        k[e.a] += w;
        k[e.b] += w;
        m2 += 2 * w;
    }
    long double q = 0;
    for (auto i : g.nodes()) {
        for (auto j : g.nodes()) {
            if (c.at(i) != c.at(j)) continue;
            const double aij = A[i].count(j) ? A[i][j] : 0.0;
            q += aij - gamma * k[i] * k[j] / m2;
        }
    }
    return static_cast<double>(q / m2);
}

// Every set partition of the node list (restricted growth strings).
void for_each_partition(const std::vector<IdentityId>& nodes, const std::function<void(const Assignment&)>& fn) {
    std::vector<CommunityId> label(nodes.size(), 0);
    std::function<void(std::size_t, CommunityId)> rec = [&](std::size_t i, CommunityId used) {
        if (i == nodes.size()) {
            Assignment a;
            for (std::size_t j = 0; j < nodes.size(); ++j) a[nodes[j]] = label[j];
            fn(a);
            return;
        }
        for (CommunityId c = 0; c <= used; ++c) {
            label[i] = c;
            rec(i + 1, std::max<CommunityId>(used, c + 1));
        }
    };
    rec(0, 0);
}

std::vector<WEdge> clique(IdentityId first, IdentityId size, std::size_t w = 1) {
    std::vector<WEdge> out;
    for (IdentityId i = first; i < first + size; ++i) {
        for (IdentityId j = i + 1; j < first + size; ++j) out.push_back({i, j, w});
    }
    return out;
}

std::vector<WEdge> random_edges(std::mt19937_64& rng, IdentityId n, double p, std::size_t max_w) {
    std::bernoulli_distribution coin(p);
    std::uniform_int_distribution<std::size_t> w(1, max_w);
    std::vector<WEdge> out;
    for (IdentityId i = 0; i < n; ++i) {
        for (IdentityId j = i + 1; j < n; ++j) {
            if (coin(rng)) out.push_back({i, j, w(rng)});
        }
    }
    return out;
}

bool same_partition(const Assignment& a, const Assignment& b) {
    if (a.size() != b.size()) return false;
    std::map<CommunityId, CommunityId> fwd, back;
    for (const auto& [node, c] : a) {
        const auto d = b.at(node);
        if (fwd.try_emplace(c, d).first->second != d) return false;
        if (back.try_emplace(d, c).first->second != c) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("two disjoint triangles") {
    auto edges = clique(0, 3);
    const auto t2 = clique(3, 3);
    edges.insert(edges.end(), t2.begin(), t2.end());
    const auto g = make_graph(edges);
    const auto p = louvain(g);
    CHECK(p.community_count() == 2);
    CHECK(p.assignment.at(0) == p.assignment.at(2));
    CHECK(p.assignment.at(3) == p.assignment.at(5));
    CHECK(p.assignment.at(0) != p.assignment.at(3));
    CHECK(p.modularity == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a dyad is one community") {
    const auto g = make_graph({{4, 9, 3}});
    const auto p = louvain(g);
    CHECK(p.community_count() == 1);
    CHECK(p.modularity == doctest::Approx(0.0));
    CHECK(p.level_modularity.front() == doctest::Approx(-0.5));
}

TEST_CASE("three-node path singletons") {
    const auto g = make_graph({{0, 1, 1}, {1, 2, 1}});
    Assignment singles{{0, 0}, {1, 1}, {2, 2}};
    CHECK(modularity(g, singles) == doctest::Approx(-0.375).epsilon(1e-12));
    Assignment all{{0, 0}, {1, 0}, {2, 0}};
    CHECK(modularity(g, all) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(modularity(g, {{0, 0}}), InvalidArgument);
}

TEST_CASE("modularity matches the double-sum definition") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const IdentityId n = 2 + static_cast<IdentityId>(rng() % 7);
        auto edges = random_edges(rng, n, 0.5, 4);
        if (edges.empty()) continue;
        const auto g = make_graph(edges);
        Assignment c;
        for (auto v : g.nodes()) c[v] = static_cast<CommunityId>(rng() % 3);
        for (double gamma : {1.0, 0.5, 2.0}) {
            for (bool weighted : {true, false}) {
                CHECK(std::abs(modularity(g, c, gamma, weighted) - reference_q(g, c, gamma, weighted)) < 1e-9);
            }
        }
    }
}

TEST_CASE("bridge of cliques reaches the exhaustive optimum") {
    auto edges = clique(0, 4);
    const auto c2 = clique(4, 4);
    edges.insert(edges.end(), c2.begin(), c2.end());
    edges.push_back({3, 4, 1});
    const auto g = make_graph(edges);

    double best = -1;
    Assignment arg;
    std::size_t count = 0;
    for_each_partition(g.nodes(), [&](const Assignment& a) {
        ++count;
        const double q = reference_q(g, a);
        if (q > best + 1e-12) best = q, arg = a;
    });
    CHECK(count == 4140);

    for (std::uint64_t seed : {0u, 1u, 2u, 99u}) {
        LouvainOptions o;
        o.seed = seed;
        const auto p = louvain(g, o);
        CHECK(std::abs(p.modularity - best) < 1e-9);
        CHECK(same_partition(p.assignment, arg));
        CHECK(p.community_count() == 2);
    }
}

TEST_CASE("Louvain matches the exhaustive optimum on small random graphs") {
    std::mt19937_64 rng(5);
    int matched = 0, total = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const auto edges = random_edges(rng, 7, 0.45, 3);
        if (edges.empty()) continue;
        const auto g = make_graph(edges);
        double best = -1;
        for_each_partition(g.nodes(), [&](const Assignment& a) { best = std::max(best, reference_q(g, a)); });
        const auto p = louvain(g);
        CHECK(p.modularity <= best + 1e-9);
        ++total;
        if (std::abs(p.modularity - best) < 1e-9) ++matched;
    }
    // Louvain is a heuristic; it should still usually find the optimum on 7 nodes.
    CHECK(matched * 10 >= total * 7);
}

TEST_CASE("planted blocks are recovered") {
    std::mt19937_64 rng(8);
    for (IdentityId k : {2u, 5u, 8u}) {
        const IdentityId size = 12;
        std::vector<WEdge> edges;
        std::bernoulli_distribution inside(0.8);
        std::bernoulli_distribution across(0.01);
        for (IdentityId i = 0; i < k * size; ++i) {
            for (IdentityId j = i + 1; j < k * size; ++j) {
                if (i / size == j / size ? inside(rng) : across(rng)) edges.push_back({i, j, 1});
            }
        }
        const auto g = make_graph(edges);
        LouvainOptions o;
        o.seed = 3;
        const auto p = louvain(g, o);
        CHECK(p.community_count() == k);
        for (IdentityId i = 0; i < k * size; ++i) {
            CHECK(p.assignment.at(i) == p.assignment.at((i / size) * size));
        }
    }
}

TEST_CASE("fixed seed gives an identical partition, levels never decrease") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = make_graph(random_edges(rng, 80, 0.06, 3));
        for (std::uint64_t seed : {0u, 1u, 12345u}) {
            LouvainOptions o;
            o.seed = seed;
            const auto a = louvain(g, o);
            const auto b = louvain(g, o);
            CHECK(a.assignment == b.assignment);
            CHECK(a.modularity == b.modularity);
            CHECK(a.level_modularity == b.level_modularity);
            for (std::size_t i = 1; i < a.level_modularity.size(); ++i) {
                CHECK(a.level_modularity[i] > a.level_modularity[i - 1]);
            }
            CHECK(std::abs(a.level_modularity.back() - a.modularity) < 1e-9);
        }
    }
}

TEST_CASE("communities stay inside connected components") {
    std::mt19937_64 rng(13);
    std::vector<WEdge> edges;
    // four components of varying density
    for (IdentityId comp = 0; comp < 4; ++comp) {
        const auto part = random_edges(rng, 15, 0.3, 2);
        for (auto e : part) edges.push_back({e.a + comp * 20, e.b + comp * 20, e.w});
    }
    const auto g = make_graph(edges);
    // component label by union-find
    std::map<IdentityId, IdentityId> parent;
    std::function<IdentityId(IdentityId)> find = [&](IdentityId x) {
        if (!parent.count(x)) parent[x] = x;
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (const auto& e : g.edges()) parent[find(e.a)] = find(e.b);
    const auto p = louvain(g);
    std::map<CommunityId, std::set<IdentityId>> comps;
    for (const auto& [node, c] : p.assignment) comps[c].insert(find(node));
    for (const auto& [c, s] : comps) CHECK(s.size() == 1);
}

TEST_CASE("55 dyads give 55 two-node communities") {
    std::vector<WEdge> edges;
    for (IdentityId i = 0; i < 55; ++i) edges.push_back({2 * i, 2 * i + 1, 1 + i % 3});
    const auto g = make_graph(edges);
    const auto p = louvain(g);
    const auto s = community_stats(p, g);
    CHECK(s.community_count == 55);
    CHECK(s.two_node_communities == 55);
    CHECK(s.size_histogram.size() == 1);
    CHECK(s.size_histogram.at(2) == 55);
    CHECK(s.largest_size == 2);
}

TEST_CASE("community ids follow the smallest member") {
    auto edges = clique(10, 3);
    const auto other = clique(0, 3);
    edges.insert(edges.end(), other.begin(), other.end());
    const auto p = louvain(make_graph(edges), {7, 1.0, true});
    CHECK(p.assignment.at(0) == 0);
    CHECK(p.assignment.at(10) == 1);
}

TEST_CASE("weights matter unless disabled") {
    // A square with one heavy pair on each side.
    const auto g = make_graph({{0, 1, 10}, {1, 2, 1}, {2, 3, 10}, {3, 0, 1}});
    const auto weighted = louvain(g);
    CHECK(weighted.community_count() == 2);
    CHECK(weighted.assignment.at(0) == weighted.assignment.at(1));
    CHECK(weighted.assignment.at(2) == weighted.assignment.at(3));
    LouvainOptions o;
    o.weighted = false;
    const auto plain = louvain(g, o);
    CHECK(std::abs(plain.modularity - modularity(g, plain.assignment, 1.0, false)) < 1e-12);
}

TEST_CASE("errors and degree centrality") {
    CHECK_THROWS_AS(louvain(make_graph({})), EmptyGraph);
    CHECK_THROWS_AS(louvain(make_graph({{0, 1, 1}}), {0, 0.0, true}), InvalidArgument);

    const auto g = make_graph({{0, 1, 2}, {0, 2, 1}, {0, 3, 1}});
    const auto d = degree_centrality(g);
    REQUIRE(d.size() == 4);
    CHECK(d[0].id == 0);
    CHECK(d[0].degree == 3);
    CHECK(d[0].strength == 4);
    CHECK(d[0].centrality == doctest::Approx(1.0));
    CHECK(d[1].centrality == doctest::Approx(1.0 / 3.0));
}
