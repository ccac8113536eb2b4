#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "txgraph/error.hpp"
#include "txgraph/graph.hpp"
#include "txgraph/ingest.hpp"
#include "txgraph/records.hpp"

namespace txgraph {

/// Everything needed to rerun the pipeline without re-reading records: the
/// address table and every monthly graph (cumulative graphs are refolded).
/// Ingest counters carried along so reports built from a snapshot match
/// reports built from the record file.
struct IngestTally {
    std::uint64_t records = 0;
    std::uint64_t skipped_lines = 0;
    std::uint64_t opaque_endpoints = 0;

    friend bool operator==(const IngestTally&, const IngestTally&) = default;
};

struct GraphSnapshot {
    YearMonth genesis;
    IngestTally ingest;
    AddressTable table;
    std::vector<MonthlyGraph> months;

    friend bool operator==(const GraphSnapshot&, const GraphSnapshot&) = default;
};

// Layout (all integers little-endian):
//   "TXGSNAP\0" u32 version
//   i32 genesis year, u32 genesis month
//   u64 records, u64 skipped lines, u64 opaque endpoints
//   u64 address count, then per address: u32 length, bytes
//   u64 month count, then per month:
//     u32 month, u64 self_transfers,
//     u64 |nodes| u32[...], u64 |undirected| (u32,u32)[...], u64 |directed| (u32,u32)[...]
inline constexpr std::array<char, 8> kSnapshotMagic = {'T', 'X', 'G', 'S', 'N', 'A', 'P', '\0'};
inline constexpr std::uint32_t kSnapshotVersion = 2;

namespace detail {

class LeWriter {
   public:
    explicit LeWriter(std::ostream& out) : out_(out) {}
    template <typename T>
    void put(T v) {
        unsigned char buf[sizeof(T)];
        auto u = static_cast<std::make_unsigned_t<T>>(v);
        for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
        out_.write(reinterpret_cast<const char*>(buf), sizeof(T));
    }
    void bytes(const std::string& s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

   private:
    std::ostream& out_;
};

class LeReader {
   public:
    explicit LeReader(std::istream& in) : in_(in) {}
    template <typename T>
    T get() {
        unsigned char buf[sizeof(T)];
        if (!in_.read(reinterpret_cast<char*>(buf), sizeof(T))) throw InputError("truncated snapshot");
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
        return static_cast<T>(u);
    }
    std::string bytes(std::size_t n) {
        std::string s(n, '\0');
        if (n && !in_.read(s.data(), static_cast<std::streamsize>(n))) throw InputError("truncated snapshot");
        return s;
    }

   private:
    std::istream& in_;
};

inline void put_edges(LeWriter& w, const std::vector<Edge>& edges) {
    w.put<std::uint64_t>(edges.size());
    for (const auto& e : edges) {
        w.put(e.a);
        w.put(e.b);
    }
}

inline std::vector<Edge> get_edges(LeReader& r, std::size_t table_size) {
    const auto n = r.get<std::uint64_t>();
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 24)));
    for (std::uint64_t i = 0; i < n; ++i) {
        Edge e{r.get<NodeId>(), r.get<NodeId>()};
        if (e.a >= table_size || e.b >= table_size) throw InputError("snapshot edge references unknown address");
        edges.push_back(e);
    }
    return edges;
}

}  // namespace detail

inline void write_snapshot(std::ostream& out, const GraphSnapshot& snap) {
    detail::LeWriter w(out);
    out.write(kSnapshotMagic.data(), kSnapshotMagic.size());
    w.put(kSnapshotVersion);
    w.put<std::int32_t>(snap.genesis.year);
    w.put<std::uint32_t>(snap.genesis.month);
    w.put(snap.ingest.records);
    w.put(snap.ingest.skipped_lines);
    w.put(snap.ingest.opaque_endpoints);
    w.put<std::uint64_t>(snap.table.size());
    for (NodeId id = 0; id < snap.table.size(); ++id) {
        const auto& a = snap.table.address(id);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(a.size()));
        w.bytes(a);
    }
    w.put<std::uint64_t>(snap.months.size());
    for (const auto& m : snap.months) {
        w.put(m.month.value);
        w.put(m.self_transfers);
        w.put<std::uint64_t>(m.nodes.size());
        for (auto v : m.nodes) w.put(v);
        detail::put_edges(w, m.undirected_edges);
        detail::put_edges(w, m.directed_edges);
    }
    if (!out) throw std::runtime_error("failed writing snapshot");
}

inline GraphSnapshot read_snapshot(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kSnapshotMagic) throw InputError("not a graph snapshot");
    detail::LeReader r(in);
    if (auto v = r.get<std::uint32_t>(); v != kSnapshotVersion)
        throw InputError("unsupported snapshot version " + std::to_string(v));
    GraphSnapshot snap;
    snap.genesis.year = r.get<std::int32_t>();
    snap.genesis.month = r.get<std::uint32_t>();
    if (snap.genesis.month < 1 || snap.genesis.month > 12) throw InputError("snapshot has invalid genesis month");
    snap.ingest.records = r.get<std::uint64_t>();
    snap.ingest.skipped_lines = r.get<std::uint64_t>();
    snap.ingest.opaque_endpoints = r.get<std::uint64_t>();
    const auto n_addr = r.get<std::uint64_t>();
    if (n_addr == 0) throw InputError("snapshot address table is empty");
    r.bytes(r.get<std::uint32_t>());  // id 0, the supernode
    for (std::uint64_t i = 1; i < n_addr; ++i) {
        auto addr = r.bytes(r.get<std::uint32_t>());
        if (snap.table.intern(std::move(addr)) != i) throw InputError("snapshot address table has duplicates");
    }
    const auto n_months = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n_months; ++i) {
        MonthlyGraph m;
        m.month = MonthIndex{r.get<std::uint32_t>()};
        if (m.month.value != i) throw InputError("snapshot months out of order");
        m.self_transfers = r.get<std::uint64_t>();
        const auto n_nodes = r.get<std::uint64_t>();
        for (std::uint64_t k = 0; k < n_nodes; ++k) {
            m.nodes.push_back(r.get<NodeId>());
            if (m.nodes.back() >= n_addr) throw InputError("snapshot node references unknown address");
        }
        m.undirected_edges = detail::get_edges(r, n_addr);
        m.directed_edges = detail::get_edges(r, n_addr);
        snap.months.push_back(std::move(m));
    }
    return snap;
}

/// src,dst CSV with original address strings.
inline void write_edge_csv(std::ostream& out, const std::vector<Edge>& edges, const AddressTable& table) {
    out << "src,dst\n";
    for (const auto& e : edges) {
        csv::write_field(out, table.address(e.a));
        out << ',';
        csv::write_field(out, table.address(e.b));
        out << '\n';
    }
}

}  // namespace txgraph
