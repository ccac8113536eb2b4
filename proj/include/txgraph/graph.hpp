#pragma once

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstdint>
#include <iterator>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "txgraph/error.hpp"
#include "txgraph/records.hpp"

namespace txgraph {

using NodeId = std::uint32_t;
inline constexpr NodeId kSupernodeId = 0;

/// Address string <-> dense id. Id 0 is always the coinbase supernode.
class AddressTable {
   public:
    AddressTable() { insert(std::string(kSupernodeToken)); }

    NodeId intern(std::string_view address) {
        if (auto it = ids_.find(std::string(address)); it != ids_.end()) return it->second;
        return insert(std::string(address));
    }

    NodeId intern(std::string&& address) {
        if (auto it = ids_.find(address); it != ids_.end()) return it->second;
        return insert(std::move(address));
    }

    NodeId intern(const char* address) { return intern(std::string_view(address)); }

    std::optional<NodeId> find(std::string_view address) const {
        if (auto it = ids_.find(std::string(address)); it != ids_.end()) return it->second;
        return std::nullopt;
    }

    const std::string& address(NodeId id) const { return names_.at(id); }
    std::size_t size() const { return names_.size(); }

    friend bool operator==(const AddressTable& a, const AddressTable& b) { return a.names_ == b.names_; }

   private:
    NodeId insert(std::string address) {
        if (names_.size() >= std::numeric_limits<NodeId>::max()) throw std::length_error("address table full");
        const auto id = static_cast<NodeId>(names_.size());
        ids_.emplace(address, id);
        names_.push_back(std::move(address));
        return id;
    }

    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> ids_;
};

/// A pair of node ids. Undirected stores keep a < b; directed stores read
/// it as a -> b.
struct Edge {
    NodeId a = 0;
    NodeId b = 0;

    friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

constexpr Edge undirected(NodeId x, NodeId y) { return x < y ? Edge{x, y} : Edge{y, x}; }

/// MTG_n: one calendar month of activity.
struct MonthlyGraph {
    MonthIndex month;
    std::vector<NodeId> nodes;           // sorted, unique
    std::vector<Edge> undirected_edges;  // sorted, unique, a < b
    std::vector<Edge> directed_edges;    // sorted, unique, no self-pairs
    std::uint64_t self_transfers = 0;

    friend bool operator==(const MonthlyGraph&, const MonthlyGraph&) = default;
};

/// CMTG_n: union of MTG_0..MTG_n. Empty until the first month is folded in.
struct CumulativeGraph {
    std::optional<MonthIndex> through_month;
    std::vector<NodeId> nodes;
    std::vector<Edge> undirected_edges;
    std::vector<Edge> directed_edges;
    std::uint64_t self_transfers = 0;

    friend bool operator==(const CumulativeGraph&, const CumulativeGraph&) = default;
};

template <typename G>
concept TransactionGraph = requires(const G& g) {
    { g.nodes } -> std::convertible_to<const std::vector<NodeId>&>;
    { g.undirected_edges } -> std::convertible_to<const std::vector<Edge>&>;
    { g.directed_edges } -> std::convertible_to<const std::vector<Edge>&>;
};

// ---------------------------------------------------------------------------
// Construction

/// Collects transaction pairs for one graph; finish() applies set semantics.
class GraphAccumulator {
   public:
    /// Adds one transaction given interned endpoints. For coinbase
    /// transactions pass the supernode as the single input.
    void add(std::span<const NodeId> inputs, std::span<const NodeId> outputs) {
        in_.assign(inputs.begin(), inputs.end());
        out_.assign(outputs.begin(), outputs.end());
        sort_unique(in_);
        sort_unique(out_);
        nodes_.insert(nodes_.end(), in_.begin(), in_.end());
        nodes_.insert(nodes_.end(), out_.begin(), out_.end());
        for (NodeId i : in_)
            for (NodeId o : out_) {
                if (i == o)
                    ++self_transfers_;
                else
                    directed_.push_back(Edge{i, o});
            }
    }

    template <typename G>
    G finish() {
        G g;
        sort_unique(nodes_);
        sort_unique(directed_);
        std::vector<Edge> und;
        und.reserve(directed_.size());
        for (const auto& e : directed_) und.push_back(undirected(e.a, e.b));
        sort_unique(und);
        g.nodes = std::move(nodes_);
        g.directed_edges = std::move(directed_);
        g.undirected_edges = std::move(und);
        g.self_transfers = self_transfers_;
        *this = GraphAccumulator{};
        return g;
    }

   private:
    template <typename T>
    static void sort_unique(std::vector<T>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    std::vector<NodeId> in_, out_;
    std::vector<NodeId> nodes_;
    std::vector<Edge> directed_;
    std::uint64_t self_transfers_ = 0;
};

struct TransactionEdges {
    std::vector<NodeId> touched;  // sorted distinct ids
    std::vector<Edge> pairs;      // sorted ordered input -> output pairs
    std::uint64_t self_pairs = 0;
};

namespace detail {

inline void intern_endpoints(const TxRecord& tx, AddressTable& table, std::vector<NodeId>& in,
                             std::vector<NodeId>& out) {
    in.clear();
    out.clear();
    if (tx.coinbase)
        in.push_back(kSupernodeId);
    else
        for (const auto& a : tx.inputs) in.push_back(table.intern(a));
    for (const auto& a : tx.outputs) out.push_back(table.intern(a));
}

}  // namespace detail

/// Ordered input -> output pairs of one transaction. Coinbase transactions
/// draw every pair from the supernode; self-pairs are only counted.
inline TransactionEdges edges_of_transaction(const TxRecord& tx, AddressTable& table) {
    std::vector<NodeId> in, out;
    detail::intern_endpoints(tx, table, in, out);
    GraphAccumulator acc;
    acc.add(in, out);
    auto g = acc.finish<CumulativeGraph>();
    return TransactionEdges{std::move(g.nodes), std::move(g.directed_edges), g.self_transfers};
}

inline MonthlyGraph build_mtg(std::span<const TxRecord> bucket, MonthIndex month, AddressTable& table) {
    GraphAccumulator acc;
    std::vector<NodeId> in, out;
    for (const auto& tx : bucket) {
        detail::intern_endpoints(tx, table, in, out);
        acc.add(in, out);
    }
    auto g = acc.finish<MonthlyGraph>();
    g.month = month;
    return g;
}

namespace detail {

template <typename T>
void union_into(std::vector<T>& acc, const std::vector<T>& add) {
    if (add.empty()) return;
    std::vector<T> merged;
    merged.reserve(acc.size() + add.size());
    std::set_union(acc.begin(), acc.end(), add.begin(), add.end(), std::back_inserter(merged));
    acc.swap(merged);
}

}  // namespace detail

/// Folds the next month into a cumulative graph, in place.
inline void accumulate_in_place(CumulativeGraph& acc, const MonthlyGraph& mtg) {
    const std::uint32_t expected = acc.through_month ? acc.through_month->value + 1 : 0;
    if (mtg.month.value != expected)
        throw PreconditionError("month discontinuity: expected month " + std::to_string(expected) + ", got " +
                                std::to_string(mtg.month.value));
    detail::union_into(acc.nodes, mtg.nodes);
    detail::union_into(acc.undirected_edges, mtg.undirected_edges);
    detail::union_into(acc.directed_edges, mtg.directed_edges);
    acc.self_transfers += mtg.self_transfers;
    acc.through_month = mtg.month;
}

inline CumulativeGraph accumulate_cmtg(CumulativeGraph prev, const MonthlyGraph& mtg) {
    accumulate_in_place(prev, mtg);
    return prev;
}

// ---------------------------------------------------------------------------
// Degree sequences and sampling

enum class DegreeVariant { undirected, in, out, total };

inline const char* to_string(DegreeVariant v) {
    switch (v) {
        case DegreeVariant::undirected: return "undirected";
        case DegreeVariant::in: return "in";
        case DegreeVariant::out: return "out";
        case DegreeVariant::total: return "total";
    }
    return "?";
}

namespace detail {

/// Global id -> position in a sorted node vector.
class LocalIndex {
   public:
    explicit LocalIndex(const std::vector<NodeId>& nodes)
        : map_(nodes.empty() ? 0 : std::size_t{nodes.back()} + 1, kAbsent) {
        for (std::size_t i = 0; i < nodes.size(); ++i) map_[nodes[i]] = static_cast<std::uint32_t>(i);
    }

    std::uint32_t operator()(NodeId id) const {
        if (id >= map_.size() || map_[id] == kAbsent) throw std::out_of_range("edge endpoint outside node set");
        return map_[id];
    }

   private:
    static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> map_;
};

}  // namespace detail

/// Degrees in the order of graph.nodes; length always equals |nodes|.
template <TransactionGraph G>
std::vector<std::uint32_t> degree_sequence(const G& graph, DegreeVariant variant) {
    std::vector<std::uint32_t> deg(graph.nodes.size(), 0);
    if (graph.nodes.empty()) return deg;
    detail::LocalIndex local(graph.nodes);
    if (variant == DegreeVariant::undirected) {
        for (const auto& e : graph.undirected_edges) {
            ++deg[local(e.a)];
            ++deg[local(e.b)];
        }
        return deg;
    }
    for (const auto& e : graph.directed_edges) {
        if (variant != DegreeVariant::in) ++deg[local(e.a)];
        if (variant != DegreeVariant::out) ++deg[local(e.b)];
    }
    return deg;
}

/// Uniform sample of min(k, |E|) undirected edges without replacement; the
/// sample and its order depend only on (graph, k, seed).
template <TransactionGraph G>
std::vector<Edge> sample_edges(const G& graph, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw PreconditionError("sample size must be positive");
    const auto& edges = graph.undirected_edges;
    const std::size_t n = edges.size();
    const std::size_t take = std::min(k, n);
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<Edge> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(edges[idx[i]]);
    return out;
}

// ---------------------------------------------------------------------------
// Compressed adjacency for metric passes

/// Undirected simple graph in CSR form over local indices 0..n-1 with sorted
/// neighbour lists. Built once per graph; immutable afterwards.
class Adjacency {
   public:
    Adjacency() = default;

    /// From local-index pairs. Self-pairs are dropped, duplicates collapse.
    static Adjacency from_edges(std::size_t n, std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
        std::vector<Edge> und;
        und.reserve(edges.size());
        for (auto [u, v] : edges) {
            if (u >= n || v >= n) throw std::out_of_range("edge endpoint out of range");
            if (u != v) und.push_back(undirected(u, v));
        }
        std::sort(und.begin(), und.end());
        und.erase(std::unique(und.begin(), und.end()), und.end());
        Adjacency adj;
        adj.build(n, und, [](NodeId x) { return x; });
        adj.labels_.resize(n);
        for (std::size_t i = 0; i < n; ++i) adj.labels_[i] = static_cast<NodeId>(i);
        return adj;
    }

    /// Local index i corresponds to graph.nodes[i].
    template <TransactionGraph G>
    static Adjacency of(const G& graph) {
        Adjacency adj;
        detail::LocalIndex local(graph.nodes);
        adj.build(graph.nodes.size(), graph.undirected_edges, [&](NodeId x) { return local(x); });
        adj.labels_ = graph.nodes;
        return adj;
    }

    std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const { return targets_.size() / 2; }

    std::span<const std::uint32_t> neighbors(std::uint32_t u) const {
        return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
    }

    std::uint32_t degree(std::uint32_t u) const { return static_cast<std::uint32_t>(offsets_[u + 1] - offsets_[u]); }

    bool adjacent(std::uint32_t u, std::uint32_t v) const {
        if (degree(u) > degree(v)) std::swap(u, v);
        auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    /// Graph-level node id of a local index.
    NodeId label(std::uint32_t u) const { return labels_[u]; }

   private:
    template <typename Map>
    void build(std::size_t n, const std::vector<Edge>& edges, Map local) {
        offsets_.assign(n + 1, 0);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> mapped;
        mapped.reserve(edges.size());
        for (const auto& e : edges) {
            const auto u = local(e.a), v = local(e.b);
            mapped.emplace_back(u, v);
            ++offsets_[u + 1];
            ++offsets_[v + 1];
        }
        for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
        targets_.resize(offsets_[n]);
        std::vector<std::uint64_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (auto [u, v] : mapped) {
            targets_[fill[u]++] = v;
            targets_[fill[v]++] = u;
        }
        for (std::size_t i = 0; i < n; ++i)
            std::sort(targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                      targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
    }

    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint32_t> targets_;
    std::vector<NodeId> labels_;
};

}  // namespace txgraph
