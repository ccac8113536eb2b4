#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "txgraph/graph.hpp"
#include "txgraph/ingest.hpp"
#include "txgraph/snapshot.hpp"
#include "txgraph/synthetic.hpp"

using namespace txgraph;

namespace {

const TxRecord kFig1{1500000000, {"A", "B", "C"}, {"D", "E"}, false};

std::set<std::pair<std::string, std::string>> named(const std::vector<Edge>& edges, const AddressTable& t) {
    std::set<std::pair<std::string, std::string>> out;
    for (auto e : edges) out.emplace(t.address(e.a), t.address(e.b));
    return out;
}

std::map<std::string, std::uint32_t> degrees_by_name(const MonthlyGraph& g, const AddressTable& t, DegreeVariant v) {
    auto seq = degree_sequence(g, v);
    std::map<std::string, std::uint32_t> out;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) out[t.address(g.nodes[i])] = seq[i];
    return out;
}

/// Random records over a small address pool so months overlap heavily.
std::vector<TxRecord> random_records(std::mt19937_64& rng, std::size_t n, std::size_t pool, std::int64_t ts) {
    std::vector<TxRecord> out;
    auto addr = [&] { return "a" + std::to_string(rng() % pool); };
    for (std::size_t i = 0; i < n; ++i) {
        TxRecord tx{ts, {}, {}, rng() % 8 == 0};
        if (!tx.coinbase)
            for (auto k = 1 + rng() % 3; k > 0; --k) tx.inputs.push_back(addr());
        for (auto k = 1 + rng() % 3; k > 0; --k) tx.outputs.push_back(addr());
        out.push_back(tx);
    }
    return out;
}

}  // namespace

TEST(AddressTable, SupernodeIsIdZero) {
    AddressTable t;
    EXPECT_EQ(t.size(), 1u);
    EXPECT_EQ(t.address(kSupernodeId), "<coinbase>");
    EXPECT_EQ(t.intern("A"), 1u);
    EXPECT_EQ(t.intern("B"), 2u);
    EXPECT_EQ(t.intern("A"), 1u);
    EXPECT_EQ(t.find("B"), 2u);
    EXPECT_FALSE(t.find("Z").has_value());
}

TEST(EdgesOfTransaction, ThreeInputsTwoOutputs) {
    AddressTable t;
    auto te = edges_of_transaction(kFig1, t);
    EXPECT_EQ(named(te.pairs, t), (std::set<std::pair<std::string, std::string>>{
                                      {"A", "D"}, {"A", "E"}, {"B", "D"}, {"B", "E"}, {"C", "D"}, {"C", "E"}}));
    EXPECT_EQ(te.touched.size(), 5u);
    EXPECT_EQ(te.self_pairs, 0u);
}

TEST(EdgesOfTransaction, CoinbaseDrawsFromSupernode) {
    AddressTable t;
    auto te = edges_of_transaction(TxRecord{1, {}, {"M1", "M2"}, true}, t);
    EXPECT_EQ(named(te.pairs, t),
              (std::set<std::pair<std::string, std::string>>{{"<coinbase>", "M1"}, {"<coinbase>", "M2"}}));
}

TEST(EdgesOfTransaction, SelfPairIsTalliedNotEdged) {
    AddressTable t;
    auto te = edges_of_transaction(TxRecord{1, {"A"}, {"A", "B"}, false}, t);
    EXPECT_EQ(named(te.pairs, t), (std::set<std::pair<std::string, std::string>>{{"A", "B"}}));
    EXPECT_EQ(te.self_pairs, 1u);
    EXPECT_EQ(te.touched.size(), 2u);
}

TEST(EdgesOfTransaction, BipartiteCompleteness) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto i = 1 + rng() % 6, o = 1 + rng() % 6;
        TxRecord tx{1, {}, {}, false};
        for (std::uint64_t k = 0; k < i; ++k) tx.inputs.push_back("in" + std::to_string(k));
        for (std::uint64_t k = 0; k < o; ++k) tx.outputs.push_back("out" + std::to_string(k));
        tx.inputs.push_back(tx.inputs.front());  // repeated input collapses
        AddressTable t;
        EXPECT_EQ(edges_of_transaction(tx, t).pairs.size(), i * o);
    }
}

TEST(BuildMtg, SingleTransaction) {
    AddressTable t;
    auto g = build_mtg(std::vector{kFig1}, MonthIndex{0}, t);
    EXPECT_EQ(g.nodes.size(), 5u);
    EXPECT_EQ(g.undirected_edges.size(), 6u);
    EXPECT_EQ(g.directed_edges.size(), 6u);
}

TEST(BuildMtg, DuplicateTransactionsCollapse) {
    AddressTable t1, t2;
    auto once = build_mtg(std::vector{kFig1}, MonthIndex{0}, t1);
    auto twice = build_mtg(std::vector{kFig1, kFig1}, MonthIndex{0}, t2);
    EXPECT_EQ(once, twice);
    EXPECT_EQ(twice.undirected_edges.size(), 6u);
}

TEST(BuildMtg, ReverseTransferAddsOnlyADirectedEdge) {
    AddressTable t;
    auto g = build_mtg(std::vector{kFig1, TxRecord{1500000001, {"D"}, {"A"}, false}}, MonthIndex{0}, t);
    EXPECT_EQ(g.undirected_edges.size(), 6u);
    EXPECT_EQ(g.directed_edges.size(), 7u);
}

TEST(BuildMtg, CoinbaseWithKOutputs) {
    for (std::size_t k = 1; k <= 5; ++k) {
        TxRecord cb{1, {}, {}, true};
        for (std::size_t i = 0; i < k; ++i) cb.outputs.push_back("M" + std::to_string(i));
        AddressTable t;
        auto g = build_mtg(std::vector{cb}, MonthIndex{0}, t);
        EXPECT_EQ(g.undirected_edges.size(), k);
        EXPECT_EQ(g.nodes.size(), k + 1);
        EXPECT_EQ(g.nodes.front(), kSupernodeId);
    }
}

TEST(BuildMtg, StructuralInvariants) {
    std::mt19937_64 rng(4);
    AddressTable t;
    auto g = build_mtg(random_records(rng, 500, 60, 1), MonthIndex{0}, t);
    std::set<Edge> projected;
    for (auto e : g.directed_edges) {
        ASSERT_NE(e.a, e.b);
        ASSERT_TRUE(std::binary_search(g.nodes.begin(), g.nodes.end(), e.a));
        ASSERT_TRUE(std::binary_search(g.nodes.begin(), g.nodes.end(), e.b));
        projected.insert(undirected(e.a, e.b));
    }
    EXPECT_EQ(std::vector<Edge>(projected.begin(), projected.end()), g.undirected_edges);
    for (auto e : g.undirected_edges) EXPECT_LT(e.a, e.b);
    for (auto v : g.nodes) EXPECT_LT(v, t.size());
}

TEST(BuildMtg, InvariantUnderDuplicationOfAnyTransaction) {
    std::mt19937_64 rng(6);
    auto recs = random_records(rng, 200, 40, 1);
    AddressTable t0;
    const auto base = build_mtg(recs, MonthIndex{0}, t0);
    for (int trial = 0; trial < 20; ++trial) {
        auto dup = recs;
        dup.push_back(recs[rng() % recs.size()]);
        std::shuffle(dup.begin(), dup.end(), rng);
        AddressTable t;
        for (NodeId id = 1; id < t0.size(); ++id) t.intern(t0.address(id));  // same ids
        // Self-pair tallies count occurrences; the graph itself must not move.
        const auto g = build_mtg(dup, MonthIndex{0}, t);
        EXPECT_EQ(g.nodes, base.nodes);
        EXPECT_EQ(g.undirected_edges, base.undirected_edges);
        EXPECT_EQ(g.directed_edges, base.directed_edges);
    }
}

TEST(AccumulateCmtg, BaseCase) {
    AddressTable t;
    auto m0 = build_mtg(std::vector{kFig1}, MonthIndex{0}, t);
    auto c0 = accumulate_cmtg(CumulativeGraph{}, m0);
    EXPECT_EQ(c0.through_month, MonthIndex{0});
    EXPECT_EQ(c0.nodes, m0.nodes);
    EXPECT_EQ(c0.undirected_edges, m0.undirected_edges);
    EXPECT_EQ(c0.directed_edges, m0.directed_edges);
}

TEST(AccumulateCmtg, DisjointMonthsAdd) {
    AddressTable t;
    auto m0 = build_mtg(std::vector{kFig1}, MonthIndex{0}, t);
    auto m1 = build_mtg(std::vector{TxRecord{2, {"P", "Q"}, {"R"}, false}}, MonthIndex{1}, t);
    auto c1 = accumulate_cmtg(accumulate_cmtg({}, m0), m1);
    EXPECT_EQ(c1.nodes.size(), m0.nodes.size() + m1.nodes.size());
    EXPECT_EQ(c1.undirected_edges.size(), m0.undirected_edges.size() + m1.undirected_edges.size());
}

TEST(AccumulateCmtg, MonthDiscontinuity) {
    AddressTable t;
    auto m0 = build_mtg(std::vector{kFig1}, MonthIndex{0}, t);
    auto m2 = build_mtg(std::vector{kFig1}, MonthIndex{2}, t);
    EXPECT_THROW(accumulate_cmtg(accumulate_cmtg({}, m0), m2), PreconditionError);
    EXPECT_THROW(accumulate_cmtg({}, m2), PreconditionError);
}

TEST(AccumulateCmtg, IncrementalEqualsBatchAndIsMonotone) {
    std::mt19937_64 rng(10);
    std::vector<std::vector<TxRecord>> buckets;
    for (int m = 0; m < 8; ++m) buckets.push_back(random_records(rng, 100 + 30 * m, 150, m));
    buckets[3].clear();  // an empty month in the middle

    AddressTable t;
    CumulativeGraph acc;
    std::vector<TxRecord> all;
    std::size_t prev_v = 0, prev_e = 0;
    for (std::uint32_t m = 0; m < buckets.size(); ++m) {
        acc = accumulate_cmtg(std::move(acc), build_mtg(buckets[m], MonthIndex{m}, t));
        all.insert(all.end(), buckets[m].begin(), buckets[m].end());
        EXPECT_GE(acc.nodes.size(), prev_v);
        EXPECT_GE(acc.undirected_edges.size(), prev_e);
        prev_v = acc.nodes.size();
        prev_e = acc.undirected_edges.size();

        // Oracle: one graph over the concatenation of all buckets so far.
        auto batch = build_mtg(all, MonthIndex{m}, t);
        EXPECT_EQ(acc.nodes, batch.nodes);
        EXPECT_EQ(acc.undirected_edges, batch.undirected_edges);
        EXPECT_EQ(acc.directed_edges, batch.directed_edges);
    }
}

TEST(DegreeSequence, ThreeInputsTwoOutputs) {
    AddressTable t;
    auto g = build_mtg(std::vector{kFig1}, MonthIndex{0}, t);
    auto und = degrees_by_name(g, t, DegreeVariant::undirected);
    EXPECT_EQ(und, (std::map<std::string, std::uint32_t>{{"A", 2}, {"B", 2}, {"C", 2}, {"D", 3}, {"E", 3}}));
    auto in = degrees_by_name(g, t, DegreeVariant::in);
    auto out = degrees_by_name(g, t, DegreeVariant::out);
    EXPECT_EQ(in["D"], 3u);
    EXPECT_EQ(in["A"], 0u);
    EXPECT_EQ(out["A"], 2u);
}

TEST(DegreeSequence, OppositeTransfersCountTwiceInTotal) {
    AddressTable t;
    auto g = build_mtg(std::vector{TxRecord{1, {"A"}, {"B"}, false}, TxRecord{2, {"B"}, {"A"}, false}}, MonthIndex{0},
                       t);
    EXPECT_EQ(degrees_by_name(g, t, DegreeVariant::total)["A"], 2u);
    EXPECT_EQ(degrees_by_name(g, t, DegreeVariant::undirected)["A"], 1u);
}

TEST(DegreeSequence, EmptyGraph) {
    for (auto v : {DegreeVariant::undirected, DegreeVariant::in, DegreeVariant::out, DegreeVariant::total})
        EXPECT_TRUE(degree_sequence(MonthlyGraph{}, v).empty());
}

TEST(DegreeSequence, LengthEqualsNodeCountAndSumsMatch) {
    std::mt19937_64 rng(12);
    AddressTable t;
    auto g = build_mtg(random_records(rng, 300, 80, 1), MonthIndex{0}, t);
    std::uint64_t sums[4] = {};
    for (auto v : {DegreeVariant::undirected, DegreeVariant::in, DegreeVariant::out, DegreeVariant::total}) {
        auto seq = degree_sequence(g, v);
        EXPECT_EQ(seq.size(), g.nodes.size());
        for (auto d : seq) sums[static_cast<int>(v)] += d;
    }
    EXPECT_EQ(sums[0], 2 * g.undirected_edges.size());
    EXPECT_EQ(sums[1], g.directed_edges.size());
    EXPECT_EQ(sums[2], g.directed_edges.size());
    EXPECT_EQ(sums[3], 2 * g.directed_edges.size());
}

TEST(SampleEdges, FiveThousandDistinctEdges) {
    SyntheticConfig cfg;
    cfg.months = 1;
    cfg.transactions = 20000;
    AddressTable t;
    auto g = build_mtg(generate_synthetic(cfg), MonthIndex{0}, t);
    ASSERT_GT(g.undirected_edges.size(), 5000u);
    auto s = sample_edges(g, 5000, 42);
    EXPECT_EQ(s.size(), 5000u);
    EXPECT_EQ(std::set<Edge>(s.begin(), s.end()).size(), 5000u);
    for (auto e : s) EXPECT_TRUE(std::binary_search(g.undirected_edges.begin(), g.undirected_edges.end(), e));
    EXPECT_EQ(sample_edges(g, 5000, 42), s);
    EXPECT_NE(sample_edges(g, 5000, 43), s);
}

TEST(SampleEdges, KAboveEdgeCountReturnsAll) {
    AddressTable t;
    auto g = build_mtg(std::vector{kFig1}, MonthIndex{0}, t);
    auto s = sample_edges(g, 100, 1);
    EXPECT_EQ(s.size(), 6u);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, g.undirected_edges);
    EXPECT_EQ(sample_edges(g, 100, 1), s);
    EXPECT_THROW(sample_edges(g, 0, 1), PreconditionError);
}

TEST(SampleEdges, RoughlyUniform) {
    AddressTable t;
    auto g = build_mtg(std::vector{kFig1}, MonthIndex{0}, t);
    std::map<Edge, int> hits;
    for (std::uint64_t seed = 0; seed < 6000; ++seed) ++hits[sample_edges(g, 1, seed)[0]];
    ASSERT_EQ(hits.size(), 6u);
    for (auto& [e, n] : hits) EXPECT_NEAR(n, 1000, 150);
}

TEST(Snapshot, RoundTripIsLossless) {
    std::mt19937_64 rng(13);
    GraphSnapshot snap;
    snap.genesis = YearMonth{2011, 10};
    for (std::uint32_t m = 0; m < 4; ++m)
        snap.months.push_back(build_mtg(random_records(rng, 100, 50, m), MonthIndex{m}, snap.table));
    std::stringstream buf;
    write_snapshot(buf, snap);
    EXPECT_EQ(read_snapshot(buf), snap);

    std::string bytes = buf.str();
    std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW(read_snapshot(truncated), InputError);
    bytes[0] = 'X';
    std::istringstream bad_magic(bytes);
    EXPECT_THROW(read_snapshot(bad_magic), InputError);
}

TEST(EdgeCsv, UsesOriginalAddresses) {
    AddressTable t;
    auto g = build_mtg(std::vector{TxRecord{1, {"A,1"}, {"B"}, false}}, MonthIndex{0}, t);
    std::ostringstream out;
    write_edge_csv(out, g.undirected_edges, t);
    EXPECT_EQ(out.str(), "src,dst\n\"A,1\",B\n");
}
