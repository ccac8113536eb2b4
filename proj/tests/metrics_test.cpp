#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "txgraph/metrics.hpp"

using namespace txgraph;

namespace {

using Pairs = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

Adjacency make(std::size_t n, const Pairs& e) { return Adjacency::from_edges(n, e); }

Adjacency complete(std::size_t n) {
    Pairs e;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return make(n, e);
}

Adjacency star(std::size_t leaves) {
    Pairs e;
    for (std::uint32_t i = 1; i <= leaves; ++i) e.emplace_back(0, i);
    return make(leaves + 1, e);
}

Adjacency path(std::size_t n) {
    Pairs e;
    for (std::uint32_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return make(n, e);
}

Adjacency cycle(std::size_t n) {
    Pairs e;
    for (std::uint32_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return make(n, e);
}

// A,B,C (0..2) each linked to D,E (3,4).
Adjacency three_by_two() { return make(5, {{0, 3}, {0, 4}, {1, 3}, {1, 4}, {2, 3}, {2, 4}}); }

Adjacency gnp(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    Pairs e;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (coin(rng)) e.emplace_back(i, j);
    return make(n, e);
}

/// Triple-loop oracle: (closed ordered-center triads, all triads).
std::pair<std::uint64_t, std::uint64_t> brute_triads(const Adjacency& g) {
    std::uint64_t closed = 0, all = 0;
    const auto n = static_cast<std::uint32_t>(g.node_count());
    for (std::uint32_t c = 0; c < n; ++c)
        for (std::uint32_t a = 0; a < n; ++a)
            for (std::uint32_t b = a + 1; b < n; ++b)
                if (a != c && b != c && g.adjacent(c, a) && g.adjacent(c, b)) {
                    ++all;
                    closed += g.adjacent(a, b);
                }
    return {closed, all};
}

/// Largest clique by checking every vertex subset: a set is a clique iff
/// removing its lowest vertex leaves a clique inside that vertex's
/// neighbourhood.
std::size_t brute_clique(const Adjacency& g) {
    const auto n = g.node_count();
    std::vector<std::uint32_t> nbr(n, 0);
    for (std::uint32_t u = 0; u < n; ++u)
        for (auto v : g.neighbors(u)) nbr[u] |= 1u << v;
    std::vector<char> is_clique(std::size_t{1} << n, 0);
    is_clique[0] = 1;
    std::size_t best = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const auto low = static_cast<std::uint32_t>(std::countr_zero(mask));
        const auto rest = mask & (mask - 1);
        if (is_clique[rest] && (rest & ~nbr[low]) == 0) {
            is_clique[mask] = 1;
            best = std::max<std::size_t>(best, static_cast<std::size_t>(std::popcount(mask)));
        }
    }
    return best;
}

bool certificate_verifies(const Adjacency& g, const CliqueResult& r) {
    if (r.certificate.size() != r.size) return false;
    for (std::size_t i = 0; i < r.certificate.size(); ++i)
        for (std::size_t j = i + 1; j < r.certificate.size(); ++j)
            if (!g.adjacent(r.certificate[i], r.certificate[j])) return false;
    return true;
}

/// Pearson over both orientations of every edge, computed directly.
double direct_pearson(const Adjacency& g) {
    std::vector<double> x, y;
    for (std::uint32_t u = 0; u < g.node_count(); ++u)
        for (auto v : g.neighbors(u)) {
            x.push_back(g.degree(u));
            y.push_back(g.degree(v));
        }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

Adjacency relabel(const Adjacency& g, std::mt19937_64& rng) {
    const auto n = g.node_count();
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    Pairs e;
    for (std::uint32_t u = 0; u < n; ++u)
        for (auto v : g.neighbors(u))
            if (u < v) e.emplace_back(perm[v], perm[u]);
    std::shuffle(e.begin(), e.end(), rng);
    return make(n, e);
}

MonthlyGraph month(std::uint32_t m, std::vector<NodeId> nodes, std::vector<Edge> edges = {}) {
    MonthlyGraph g;
    g.month = MonthIndex{m};
    g.nodes = std::move(nodes);
    g.undirected_edges = std::move(edges);
    return g;
}

}  // namespace

TEST(Density, Examples) {
    EXPECT_DOUBLE_EQ(density(5, 10), 1.0);
    EXPECT_NEAR(density(3, 2), 0.666667, 1e-6);
    EXPECT_NEAR(density(134607, 6538828), 7.217683687395877e-4, 1e-15);
    EXPECT_THROW(density(1, 0), UndefinedError);
    EXPECT_THROW(density(0, 0), UndefinedError);
}

TEST(EdgeVertexRatio, Examples) {
    EXPECT_NEAR(edge_vertex_ratio(62321, 137825), 2.2115338328974183, 1e-12);
    EXPECT_NEAR(edge_vertex_ratio(134607, 6538828), 48.57717652128047, 1e-12);
    EXPECT_EQ(edge_vertex_ratio(7, 0), 0.0);
    EXPECT_THROW(edge_vertex_ratio(0, 0), UndefinedError);
}

TEST(ClusteringExact, Examples) {
    auto k3 = clustering_exact(complete(3));
    EXPECT_EQ(k3.value, 1.0);
    EXPECT_EQ(k3.samples, 3u);
    EXPECT_TRUE(k3.exact);
    EXPECT_EQ(clustering_exact(three_by_two()).value, 0.0);
    auto k4 = clustering_exact(complete(4));
    EXPECT_EQ(k4.value, 1.0);
    EXPECT_EQ(k4.triangle_hits, 12u);  // 3 x 4 triangles
    EXPECT_EQ(k4.samples, 12u);
}

TEST(ClusteringExact, Errors) {
    EXPECT_THROW(clustering_exact(make(2, {{0, 1}})), UndefinedError);
    EXPECT_THROW(clustering_exact(complete(5), 4), PreconditionError);
}

TEST(ClusteringExact, MatchesTripleLoopOracle) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto g = gnp(40, 0.05 + 0.01 * static_cast<double>(seed), seed);
        auto [closed, all] = brute_triads(g);
        if (all == 0) continue;
        auto c = clustering_exact(g);
        EXPECT_EQ(c.samples, all);
        EXPECT_EQ(c.triangle_hits, closed);
        EXPECT_LE(c.triangle_hits, c.samples);
        EXPECT_GE(c.value, 0.0);
        EXPECT_LE(c.value, 1.0);
    }
}

TEST(ClusteringSampled, Examples) {
    EXPECT_EQ(clustering_sampled(complete(3), 1000, 1).value, 1.0);
    EXPECT_EQ(clustering_sampled(three_by_two(), 1000, 1).value, 0.0);
    EXPECT_THROW(clustering_sampled(path(2), 1000, 1), UndefinedError);
    EXPECT_THROW(clustering_sampled(path(3), 0, 1), PreconditionError);
}

TEST(ClusteringSampled, CloseToExactOnRandomGraph) {
    auto g = gnp(100, 0.1, 2024);
    auto exact = clustering_exact(g).value;
    auto est = clustering_sampled(g, 100'000, 7);
    EXPECT_NEAR(est.value, exact, 0.01);
    EXPECT_EQ(est.samples, 100'000u);
    EXPECT_FALSE(est.exact);
}

TEST(ClusteringSampled, UnbiasedAcrossSeeds) {
    auto g = gnp(100, 0.1, 2024);
    const double exact = clustering_exact(g).value;
    const std::uint64_t per_seed = 10'000;
    double sum = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) sum += clustering_sampled(g, per_seed, seed).value;
    const double mean = sum / 100.0;
    const double se = std::sqrt(exact * (1 - exact) / (100.0 * per_seed));
    EXPECT_LE(std::abs(mean - exact), 3 * se);
}

TEST(ClusteringSampled, IndependentOfWorkerCount) {
    auto g = gnp(300, 0.05, 5);
    auto one = clustering_sampled(g, 300'000, 99, 1);
    for (unsigned w : {2u, 3u, 8u}) EXPECT_EQ(clustering_sampled(g, 300'000, 99, w).triangle_hits, one.triangle_hits);
}

TEST(MaxClique, Examples) {
    auto k3_pendant = make(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
    auto r = max_clique(k3_pendant);
    EXPECT_EQ(r.size, 3u);
    EXPECT_EQ(r.certificate, (std::vector<NodeId>{0, 1, 2}));
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(max_clique(three_by_two()).size, 2u);
    EXPECT_EQ(max_clique(Adjacency{}).size, 0u);
    EXPECT_EQ(max_clique(make(3, {})).size, 1u);
    EXPECT_EQ(max_clique(complete(12)).size, 12u);
}

TEST(MaxClique, MatchesSubsetEnumeration) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 5 + static_cast<std::size_t>(i) % 21;
        const double p = 0.2 + 0.7 * std::uniform_real_distribution<double>(0, 1)(rng);
        auto g = gnp(n, p, rng());
        auto r = max_clique(g);
        EXPECT_EQ(r.size, brute_clique(g)) << "graph " << i;
        EXPECT_TRUE(r.exact);
        EXPECT_TRUE(certificate_verifies(g, r));
    }
}

TEST(MaxClique, InvariantUnderRelabeling) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        auto g = gnp(60, 0.3, rng());
        EXPECT_EQ(max_clique(g).size, max_clique(relabel(g, rng)).size);
    }
}

TEST(MaxClique, StepBudgetReportsInexact) {
    auto g = gnp(200, 0.9, 1);
    CliqueBudget budget;
    budget.steps = 10;
    auto r = max_clique(g, budget);
    EXPECT_FALSE(r.exact);
    EXPECT_GE(r.size, 2u);
    EXPECT_TRUE(certificate_verifies(g, r));
}

TEST(Assortativity, StarAndPath) {
    auto s = star(5);
    EXPECT_NEAR(assortativity(s), -1.0, 1e-12);
    EXPECT_NEAR(assortativity(s), direct_pearson(s), 1e-12);
    auto p4 = path(4);
    EXPECT_NEAR(assortativity(p4), -0.5, 1e-12);
    EXPECT_NEAR(assortativity(p4), direct_pearson(p4), 1e-12);
}

TEST(Assortativity, RegularGraphsAreUndefined) {
    EXPECT_THROW(assortativity(cycle(5)), UndefinedError);
    EXPECT_THROW(assortativity(complete(6)), UndefinedError);
    EXPECT_THROW(assortativity(make(3, {})), UndefinedError);
}

TEST(Assortativity, MatchesOracleAndIsRelabelInvariant) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 20; ++i) {
        auto g = gnp(80, 0.02 + 0.01 * i, rng());
        const double r = assortativity(g);
        EXPECT_NEAR(r, direct_pearson(g), 1e-12);
        EXPECT_GE(r, -1.0);
        EXPECT_LE(r, 1.0);
        EXPECT_NEAR(assortativity(relabel(g, rng)), r, 1e-12);
    }
}

TEST(RepetitionRatio, Nodes) {
    EXPECT_EQ(repetition_ratio_nodes(month(1, {1, 2, 3}), month(0, {1, 2, 3})), 1.0);
    EXPECT_EQ(repetition_ratio_nodes(month(1, {4, 5}), month(0, {1, 2, 3})), 0.0);
    // prev {A,B,C}, curr {B,C,D,E}
    EXPECT_EQ(repetition_ratio_nodes(month(1, {2, 3, 4, 5}), month(0, {1, 2, 3})), 0.5);
    EXPECT_THROW(repetition_ratio_nodes(month(1, {}), month(0, {1})), UndefinedError);
    EXPECT_THROW(repetition_ratio_nodes(month(2, {1}), month(0, {1})), PreconditionError);
}

TEST(RepetitionRatio, Edges) {
    const Edge ab{1, 2}, bc{2, 3}, cd{3, 4};
    EXPECT_EQ(repetition_ratio_edges(month(1, {1, 2, 3}, {ab, bc}), month(0, {1, 2, 3}, {ab, bc})), 1.0);
    EXPECT_EQ(repetition_ratio_edges(month(1, {3, 4}, {cd}), month(0, {1, 2, 3}, {ab, bc})), 0.0);
    EXPECT_EQ(repetition_ratio_edges(month(1, {2, 3, 4}, {bc, cd}), month(0, {1, 2, 3}, {ab, bc})), 0.5);
    EXPECT_THROW(repetition_ratio_edges(month(3, {1}, {ab}), month(1, {1}, {ab})), PreconditionError);
}

TEST(RepetitionRatio, InvariantUnderConsistentRelabeling) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::set<NodeId> a, b;
        for (int i = 0; i < 30; ++i) a.insert(static_cast<NodeId>(rng() % 60));
        for (int i = 0; i < 30; ++i) b.insert(static_cast<NodeId>(rng() % 60));
        std::vector<NodeId> perm(60);
        std::iota(perm.begin(), perm.end(), 0u);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto map = [&](const std::set<NodeId>& s) {
            std::vector<NodeId> out;
            for (auto v : s) out.push_back(perm[v]);
            std::sort(out.begin(), out.end());
            return out;
        };
        EXPECT_EQ(repetition_ratio_nodes(month(1, {b.begin(), b.end()}), month(0, {a.begin(), a.end()})),
                  repetition_ratio_nodes(month(1, map(b)), month(0, map(a))));
    }
}

TEST(Density, GraphBuilderOutputStaysInUnitInterval) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        auto g = gnp(2 + rng() % 50, 0.5, rng());
        const double d = density(g.node_count(), g.edge_count());
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
    }
}
