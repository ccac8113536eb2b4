#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "txgraph/error.hpp"
#include "txgraph/graph.hpp"

namespace txgraph {

/// 2|E| / (|V|(|V|-1)).
inline double density(std::uint64_t n_nodes, std::uint64_t n_edges) {
    if (n_nodes < 2) throw UndefinedError("density needs at least 2 nodes");
    const double n = static_cast<double>(n_nodes);
    return 2.0 * static_cast<double>(n_edges) / (n * (n - 1.0));
}

inline double edge_vertex_ratio(std::uint64_t n_nodes, std::uint64_t n_edges) {
    if (n_nodes == 0) throw UndefinedError("edge-to-vertex ratio of an empty graph");
    return static_cast<double>(n_edges) / static_cast<double>(n_nodes);
}

// ---------------------------------------------------------------------------
// Clustering coefficient

struct ClusteringEstimate {
    double value = 0.0;
    std::uint64_t samples = 0;        // triads examined (all of them when exact)
    std::uint64_t triangle_hits = 0;  // closed triads among them
    std::uint64_t seed = 0;
    bool exact = false;
};

inline constexpr std::size_t kDefaultExactClusteringCap = 1'000'000;

inline std::uint64_t triad_count(const Adjacency& g) {
    std::uint64_t t = 0;
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
        const std::uint64_t d = g.degree(v);
        t += d * (d - (d > 0)) / 2;
    }
    return t;
}

/// Triangles via the degree-ordered forward algorithm.
inline std::uint64_t triangle_count(const Adjacency& g) {
    const auto n = static_cast<std::uint32_t>(g.node_count());
    auto before = [&](std::uint32_t u, std::uint32_t v) {
        return g.degree(u) < g.degree(v) || (g.degree(u) == g.degree(v) && u < v);
    };
    std::vector<std::vector<std::uint32_t>> fwd(n);
    for (std::uint32_t u = 0; u < n; ++u)
        for (auto v : g.neighbors(u))
            if (before(u, v)) fwd[u].push_back(v);
    for (auto& list : fwd) std::sort(list.begin(), list.end());
    std::uint64_t count = 0;
    for (std::uint32_t u = 0; u < n; ++u)
        for (auto v : fwd[u]) {
            const auto& a = fwd[u];
            const auto& b = fwd[v];
            std::size_t i = 0, j = 0;
            while (i < a.size() && j < b.size()) {
                if (a[i] < b[j])
                    ++i;
                else if (b[j] < a[i])
                    ++j;
                else {
                    ++count;
                    ++i;
                    ++j;
                }
            }
        }
    return count;
}

/// C = 3 * triangles / triads, by full enumeration.
inline ClusteringEstimate clustering_exact(const Adjacency& g, std::size_t node_cap = kDefaultExactClusteringCap) {
    if (g.node_count() > node_cap)
        throw PreconditionError("graph has " + std::to_string(g.node_count()) +
                                " nodes, above the exact clustering cap of " + std::to_string(node_cap));
    const auto triads = triad_count(g);
    if (triads == 0) throw UndefinedError("clustering coefficient undefined: no triads");
    const auto closed = 3 * triangle_count(g);
    return ClusteringEstimate{static_cast<double>(closed) / static_cast<double>(triads), triads, closed, 0, true};
}

template <TransactionGraph G>
ClusteringEstimate clustering_exact(const G& graph, std::size_t node_cap = kDefaultExactClusteringCap) {
    if (graph.nodes.size() > node_cap)
        throw PreconditionError("graph above the exact clustering cap");
    return clustering_exact(Adjacency::of(graph), node_cap);
}

/// min(1e6, 100 |V|).
inline std::uint64_t default_triad_samples(std::uint64_t n_nodes) {
    return std::min<std::uint64_t>(1'000'000, 100 * n_nodes);
}

namespace detail {

inline constexpr std::uint64_t kTriadChunk = 1u << 16;

inline std::uint64_t sample_chunk(const Adjacency& g, const std::vector<std::uint64_t>& cumulative,
                                  std::uint64_t count, std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::uint64_t> pick_triad(0, cumulative.back() - 1);
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < count; ++s) {
        const auto r = pick_triad(rng);
        const auto center = static_cast<std::uint32_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
        const auto nb = g.neighbors(center);
        std::uniform_int_distribution<std::size_t> first(0, nb.size() - 1);
        std::uniform_int_distribution<std::size_t> second(0, nb.size() - 2);
        const auto i = first(rng);
        auto j = second(rng);
        if (j >= i) ++j;
        hits += g.adjacent(nb[i], nb[j]);
    }
    return hits;
}

}  // namespace detail

/// Triad-sampling estimate: the centre is drawn with weight deg(deg-1)/2 and
/// then two distinct neighbours, so each triad is equally likely. The sample
/// budget is cut into fixed-size chunks seeded by (seed, chunk index), which
/// makes the result independent of the worker count.
inline ClusteringEstimate clustering_sampled(const Adjacency& g, std::uint64_t samples, std::uint64_t seed,
                                             unsigned workers = std::thread::hardware_concurrency()) {
    if (samples == 0) throw PreconditionError("sample count must be positive");
    std::vector<std::uint64_t> cumulative(g.node_count());
    std::uint64_t total = 0;
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
        const std::uint64_t d = g.degree(v);
        total += d * (d - (d > 0)) / 2;
        cumulative[v] = total;
    }
    if (total == 0) throw UndefinedError("clustering coefficient undefined: no node of degree >= 2");

    const std::uint64_t chunks = (samples + detail::kTriadChunk - 1) / detail::kTriadChunk;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(chunks, 64))));
    std::vector<std::uint64_t> hits(chunks, 0);
    auto run = [&](unsigned w) {
        for (std::uint64_t c = w; c < chunks; c += workers) {
            const auto count = std::min(detail::kTriadChunk, samples - c * detail::kTriadChunk);
            hits[c] = detail::sample_chunk(g, cumulative, count, seed, c);
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }
    std::uint64_t closed = 0;
    for (auto h : hits) closed += h;
    return ClusteringEstimate{static_cast<double>(closed) / static_cast<double>(samples), samples, closed, seed,
                              false};
}

template <TransactionGraph G>
ClusteringEstimate clustering_sampled(const G& graph, std::uint64_t samples, std::uint64_t seed) {
    return clustering_sampled(Adjacency::of(graph), samples, seed);
}

// ---------------------------------------------------------------------------
// Maximum clique

struct CliqueBudget {
    std::optional<std::chrono::steady_clock::duration> time = std::chrono::seconds(60);
    std::optional<std::uint64_t> steps;  // branch-and-bound node expansions
};

struct CliqueResult {
    std::size_t size = 0;
    std::vector<NodeId> certificate;  // graph-level ids, ascending
    bool exact = true;
};

namespace detail {

/// Bitset branch and bound over one small candidate set with a greedy
/// colouring bound.
class CliqueSearch {
   public:
    using Word = std::uint64_t;

    CliqueSearch(std::size_t n, std::uint64_t& steps, const CliqueBudget& budget,
                 std::chrono::steady_clock::time_point deadline)
        : n_(n), words_((n + 63) / 64), adj_(n * words_, 0), steps_(steps), budget_(budget), deadline_(deadline) {}

    void connect(std::size_t u, std::size_t v) {
        adj_[u * words_ + v / 64] |= Word{1} << (v % 64);
        adj_[v * words_ + u / 64] |= Word{1} << (u % 64);
    }

    /// Searches for a clique larger than `best`; fills `found` with local
    /// indices when one is found. Returns false when the budget ran out.
    bool run(std::size_t best, std::vector<std::size_t>& found) {
        best_ = best;
        found_ = &found;
        std::vector<Word> all(words_, 0);
        for (std::size_t i = 0; i < n_; ++i) all[i / 64] |= Word{1} << (i % 64);
        current_.clear();
        return expand(all);
    }

   private:
    bool out_of_budget() {
        ++steps_;
        if (budget_.steps && steps_ > *budget_.steps) return true;
        if (budget_.time && (steps_ & 0xff) == 0 && std::chrono::steady_clock::now() > deadline_) return true;
        return false;
    }

    // Greedy sequential colouring of P; emits vertices in colour order with
    // their colour numbers (upper bounds on clique size within the prefix).
    void colour(const std::vector<Word>& P, std::vector<std::size_t>& order, std::vector<std::size_t>& bound) const {
        order.clear();
        bound.clear();
        std::vector<Word> uncoloured = P;
        std::size_t k = 0;
        std::vector<Word> q(words_);
        while (std::any_of(uncoloured.begin(), uncoloured.end(), [](Word w) { return w != 0; })) {
            ++k;
            q = uncoloured;
            for (std::size_t w = 0; w < words_; ++w) {
                while (q[w]) {
                    const std::size_t v = w * 64 + static_cast<std::size_t>(std::countr_zero(q[w]));
                    const Word bit = Word{1} << (v % 64);
                    q[w] &= ~bit;
                    uncoloured[w] &= ~bit;
                    for (std::size_t x = 0; x < words_; ++x) q[x] &= ~adj_[v * words_ + x];
                    order.push_back(v);
                    bound.push_back(k);
                }
            }
        }
    }

    bool expand(std::vector<Word> P) {
        if (out_of_budget()) return false;
        std::vector<std::size_t> order, bound;
        colour(P, order, bound);
        for (std::size_t i = order.size(); i-- > 0;) {
            if (current_.size() + bound[i] <= best_) return true;
            const std::size_t v = order[i];
            current_.push_back(v);
            std::vector<Word> next(words_);
            bool empty = true;
            for (std::size_t w = 0; w < words_; ++w) {
                next[w] = P[w] & adj_[v * words_ + w];
                empty &= next[w] == 0;
            }
            if (empty) {
                if (current_.size() > best_) {
                    best_ = current_.size();
                    *found_ = current_;
                }
            } else if (!expand(std::move(next))) {
                return false;
            }
            current_.pop_back();
            P[v / 64] &= ~(Word{1} << (v % 64));
        }
        return true;
    }

    std::size_t n_, words_;
    std::vector<Word> adj_;
    std::uint64_t& steps_;
    const CliqueBudget& budget_;
    std::chrono::steady_clock::time_point deadline_;
    std::size_t best_ = 0;
    std::vector<std::size_t>* found_ = nullptr;
    std::vector<std::size_t> current_;
};

/// Degeneracy (smallest-last) order via bucket peeling; ties by local index.
inline std::vector<std::uint32_t> degeneracy_order(const Adjacency& g) {
    const auto n = static_cast<std::uint32_t>(g.node_count());
    std::vector<std::uint32_t> deg(n);
    std::uint32_t max_deg = 0;
    for (std::uint32_t v = 0; v < n; ++v) max_deg = std::max(max_deg, deg[v] = g.degree(v));
    std::vector<std::vector<std::uint32_t>> buckets(std::size_t{max_deg} + 1);
    for (std::uint32_t v = n; v-- > 0;) buckets[deg[v]].push_back(v);
    std::vector<char> removed(n, 0);
    std::vector<std::uint32_t> order;
    order.reserve(n);
    std::uint32_t d = 0;
    while (order.size() < n) {
        d = d > 0 ? d - 1 : 0;
        while (buckets[d].empty()) ++d;
        const auto v = buckets[d].back();
        buckets[d].pop_back();
        if (removed[v] || deg[v] != d) continue;
        removed[v] = 1;
        order.push_back(v);
        for (auto w : g.neighbors(v))
            if (!removed[w]) buckets[--deg[w]].push_back(w);
    }
    return order;
}

}  // namespace detail

/// Exact maximum clique unless the budget runs out (then best found so far
/// with exact = false). Vertices are processed in degeneracy order and each
/// subproblem only sees later neighbours, so subproblems stay small on
/// sparse graphs.
inline CliqueResult max_clique(const Adjacency& g, const CliqueBudget& budget = {}) {
    CliqueResult result;
    const auto n = g.node_count();
    if (n == 0) return result;
    const auto deadline = std::chrono::steady_clock::now() +
                          budget.time.value_or(std::chrono::steady_clock::duration::zero());
    std::vector<std::uint32_t> best{0};
    if (g.edge_count() > 0) {
        for (std::uint32_t v = 0; v < n; ++v)
            if (g.degree(v) > 0) {
                best = {v, g.neighbors(v).front()};
                break;
            }
    }
    const auto order = detail::degeneracy_order(g);
    std::vector<std::uint32_t> pos(n);
    for (std::uint32_t i = 0; i < n; ++i) pos[order[i]] = i;

    std::uint64_t steps = 0;
    std::vector<std::uint32_t> cand;
    std::vector<std::size_t> found;
    for (auto v : order) {
        cand.clear();
        for (auto w : g.neighbors(v))
            if (pos[w] > pos[v]) cand.push_back(w);
        if (cand.size() + 1 <= best.size()) continue;
        detail::CliqueSearch search(cand.size(), steps, budget, deadline);
        for (std::size_t i = 0; i < cand.size(); ++i)
            for (std::size_t j = i + 1; j < cand.size(); ++j)
                if (g.adjacent(cand[i], cand[j])) search.connect(i, j);
        found.clear();
        const bool finished = search.run(best.size() - 1, found);
        if (!found.empty() && found.size() + 1 > best.size()) {
            best = {v};
            for (auto i : found) best.push_back(cand[i]);
        }
        if (!finished) {
            result.exact = false;
            break;
        }
    }
    result.size = best.size();
    for (auto u : best) result.certificate.push_back(g.label(u));
    std::sort(result.certificate.begin(), result.certificate.end());
    return result;
}

template <TransactionGraph G>
CliqueResult max_clique(const G& graph, const CliqueBudget& budget = {}) {
    return max_clique(Adjacency::of(graph), budget);
}

// ---------------------------------------------------------------------------
// Degree assortativity

/// Pearson correlation of endpoint degrees over both orientations of every
/// undirected edge.
inline double assortativity(const Adjacency& g) {
    const auto m = g.edge_count();
    if (m == 0) throw UndefinedError("assortativity undefined: no edges");
    // Both orientations are present, so x and y share one mean and variance.
    long double sum = 0;
    for (std::uint32_t u = 0; u < g.node_count(); ++u) sum += static_cast<long double>(g.degree(u)) * g.degree(u);
    const long double mean = sum / (2.0L * m);
    long double var = 0, cov = 0;
    for (std::uint32_t u = 0; u < g.node_count(); ++u) {
        const long double du = g.degree(u) - mean;
        for (auto v : g.neighbors(u)) {
            const long double dv = g.degree(v) - mean;
            var += du * du;
            cov += du * dv;
        }
    }
    if (var <= 0) throw UndefinedError("assortativity undefined: all edge endpoints share one degree");
    return static_cast<double>(std::clamp(cov / var, -1.0L, 1.0L));
}

template <TransactionGraph G>
double assortativity(const G& graph) {
    return assortativity(Adjacency::of(graph));
}

// ---------------------------------------------------------------------------
// Month-over-month repetition

namespace detail {

template <typename T>
std::size_t intersection_size(const std::vector<T>& a, const std::vector<T>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

inline void check_consecutive(const MonthlyGraph& curr, const MonthlyGraph& prev) {
    if (curr.month.value != prev.month.value + 1)
        throw PreconditionError("repetition ratio needs consecutive months");
}

}  // namespace detail

/// |V_curr ∩ V_prev| / |V_curr|.
inline double repetition_ratio_nodes(const MonthlyGraph& curr, const MonthlyGraph& prev) {
    detail::check_consecutive(curr, prev);
    if (curr.nodes.empty()) throw UndefinedError("repetition ratio undefined: current month has no nodes");
    return static_cast<double>(detail::intersection_size(curr.nodes, prev.nodes)) /
           static_cast<double>(curr.nodes.size());
}

/// |E_curr ∩ E_prev| / |E_curr| over undirected edges.
inline double repetition_ratio_edges(const MonthlyGraph& curr, const MonthlyGraph& prev) {
    detail::check_consecutive(curr, prev);
    if (curr.undirected_edges.empty()) throw UndefinedError("repetition ratio undefined: current month has no edges");
    return static_cast<double>(detail::intersection_size(curr.undirected_edges, prev.undirected_edges)) /
           static_cast<double>(curr.undirected_edges.size());
}

}  // namespace txgraph
