#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "txgraph/error.hpp"
#include "txgraph/fitting.hpp"
#include "txgraph/graph.hpp"
#include "txgraph/ingest.hpp"
#include "txgraph/metrics.hpp"
#include "txgraph/records.hpp"
#include "txgraph/snapshot.hpp"

namespace txgraph {

enum class RecordFormat { jsonl, csv };

inline RecordFormat format_for(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? RecordFormat::csv : RecordFormat::jsonl;
}

struct XMinPolicy {
    std::uint64_t fixed = 1;
    bool scan = false;  // pick x_min by minimum KS distance instead
};

struct MetricFlags {
    bool clustering = true;
    bool clique = true;
    bool assortativity = true;
    bool power_law = true;
};

struct RunConfig {
    std::optional<std::filesystem::path> records;
    std::optional<RecordFormat> format;              // default: by extension
    std::optional<std::filesystem::path> snapshot;  // replaces `records` when set
    std::optional<std::filesystem::path> price;
    std::filesystem::path out_dir = "report";
    std::optional<YearMonth> genesis_month;  // default: month of the earliest record
    std::string coin_name = "coin";
    bool lenient = false;

    std::optional<std::uint64_t> clustering_samples;  // default min(1e6, 100 |V|)
    std::uint64_t seed = 1;
    std::uint64_t node_cap = 1'000'000;  // CMTG size gate for clustering, clique, assortativity
    CliqueBudget clique_budget;
    XMinPolicy x_min;
    MetricFlags enabled;

    std::size_t anomaly_window = 2;
    double anomaly_threshold = 5.0;
    std::size_t edge_sample_size = 0;  // per-month MTG edge samples for plotting; 0 = off
};

struct MetricRow {
    MonthIndex month;
    std::uint64_t mtg_nodes = 0, mtg_edges = 0, cmtg_nodes = 0, cmtg_edges = 0;
    std::optional<double> mtg_density, cmtg_density;
    std::optional<double> ev_mtg, ev_cmtg;
    std::optional<double> rr_nodes, rr_edges;
    std::optional<double> assortativity;
    std::optional<ClusteringEstimate> clustering;
    std::optional<std::size_t> max_clique;
    std::optional<bool> clique_exact;
    std::array<std::optional<PowerLawFit>, 4> alpha;  // indexed by DegreeVariant
    std::uint64_t self_transfers = 0;
};

struct NamedCorrelation {
    std::string name;
    std::optional<double> value;
    std::size_t pairs = 0;
    std::size_t dropped = 0;
    std::string note;  // reason when value is absent
};

struct Summary {
    std::optional<GrowthRate> rgr_nodes, rgr_edges;
    std::optional<PowerModelFit> power_model;
    bool price_present = false;
    std::vector<NamedCorrelation> price_correlations;
    std::vector<NamedCorrelation> size_correlations;
    std::vector<MonthIndex> anomalies;
};

struct Diagnostics {
    std::uint64_t records = 0;
    std::uint64_t skipped_lines = 0;
    std::uint64_t opaque_endpoints = 0;
    std::uint64_t self_transfers = 0;
};

struct Report {
    std::string coin;
    YearMonth genesis;
    std::vector<MetricRow> rows;
    Summary summary;
    Diagnostics diagnostics;
    std::map<std::uint32_t, std::vector<std::pair<std::string, std::string>>> edge_samples;
};

// ---------------------------------------------------------------------------
// Building graphs from a record file

namespace detail {

/// Interned transactions in flat arrays; far smaller than TxRecord vectors.
struct PackedRecords {
    std::vector<std::int64_t> ts;
    std::vector<std::uint32_t> offset{0};  // ids[offset[i]..offset[i+1]) = inputs then outputs
    std::vector<std::uint32_t> n_inputs;   // 0 for coinbase
    std::vector<NodeId> ids;

    std::size_t size() const { return ts.size(); }
};

template <typename Reader>
void pack_all(Reader& reader, AddressTable& table, PackedRecords& out, IngestTally& diag) {
    while (auto tx = reader.next()) {
        out.ts.push_back(tx->timestamp);
        out.n_inputs.push_back(static_cast<std::uint32_t>(tx->inputs.size()));
        for (auto* side : {&tx->inputs, &tx->outputs})
            for (auto& a : *side) {
                if (a == kOpaqueInputToken || a == kOpaqueOutputToken) ++diag.opaque_endpoints;
                out.ids.push_back(table.intern(std::move(a)));
            }
        out.offset.push_back(static_cast<std::uint32_t>(out.ids.size()));
    }
    diag.records = out.size();
    diag.skipped_lines = reader.skipped();
}

}  // namespace detail

/// Reads a record file and builds every monthly graph. Addresses are interned
/// in file order.
inline GraphSnapshot build_snapshot(const std::filesystem::path& path, RecordFormat format,
                                    std::optional<YearMonth> genesis, ParseOptions opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    GraphSnapshot snap;
    detail::PackedRecords packed;
    if (format == RecordFormat::csv) {
        CsvReader reader(in, opts);
        detail::pack_all(reader, snap.table, packed, snap.ingest);
    } else {
        JsonlReader reader(in, opts);
        detail::pack_all(reader, snap.table, packed, snap.ingest);
    }
    if (packed.size() == 0) throw InputError("no records");
    if (!genesis) genesis = YearMonth::of_timestamp(*std::min_element(packed.ts.begin(), packed.ts.end()));
    snap.genesis = *genesis;

    std::vector<std::uint32_t> month(packed.size());
    std::uint32_t last = 0;
    for (std::size_t i = 0; i < packed.size(); ++i) {
        month[i] = month_index(packed.ts[i], *genesis).value;
        last = std::max(last, month[i]);
    }
    // Counting sort of record positions by month.
    std::vector<std::size_t> start(std::size_t{last} + 2, 0);
    for (auto m : month) ++start[m + 1];
    for (std::size_t m = 0; m <= last; ++m) start[m + 1] += start[m];
    std::vector<std::uint32_t> order(packed.size());
    {
        auto fill = start;
        for (std::size_t i = 0; i < packed.size(); ++i) order[fill[month[i]]++] = static_cast<std::uint32_t>(i);
    }
    const NodeId supernode[] = {kSupernodeId};
    for (std::uint32_t m = 0; m <= last; ++m) {
        GraphAccumulator acc;
        for (std::size_t k = start[m]; k < start[m + 1]; ++k) {
            const auto i = order[k];
            std::span<const NodeId> all(packed.ids.data() + packed.offset[i], packed.offset[i + 1] - packed.offset[i]);
            const auto n_in = packed.n_inputs[i];
            if (n_in == 0)
                acc.add(supernode, all);
            else
                acc.add(all.first(n_in), all.subspan(n_in));
        }
        auto g = acc.finish<MonthlyGraph>();
        g.month = MonthIndex{m};
        snap.months.push_back(std::move(g));
    }
    return snap;
}

// ---------------------------------------------------------------------------
// Anomalies

/// Flags month m when series[m] > threshold x the median of the `window`
/// nearest months (earlier first on ties; undefined values ignored).
inline std::vector<MonthIndex> detect_anomalies(std::span<const std::optional<double>> series, std::size_t window,
                                                double threshold) {
    if (window == 0) throw PreconditionError("anomaly window must be positive");
    if (series.size() < window + 1)
        throw PreconditionError("anomaly detection needs at least window + 1 months");
    std::vector<MonthIndex> flagged;
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    for (std::ptrdiff_t m = 0; m < n; ++m) {
        if (!series[m]) continue;
        std::vector<double> around;
        std::size_t taken = 0;
        for (std::ptrdiff_t d = 1; taken < window && (m - d >= 0 || m + d < n); ++d)
            for (auto j : {m - d, m + d}) {
                if (taken == window || j < 0 || j >= n) continue;
                ++taken;
                if (series[j]) around.push_back(*series[j]);
            }
        if (around.empty()) continue;
        std::sort(around.begin(), around.end());
        const auto k = around.size();
        const double median = k % 2 ? around[k / 2] : 0.5 * (around[k / 2 - 1] + around[k / 2]);
        if (median > 0.0 && *series[m] > threshold * median) flagged.push_back(MonthIndex{static_cast<std::uint32_t>(m)});
    }
    return flagged;
}

/// Runs on the MTG edge-to-vertex ratio column.
inline std::vector<MonthIndex> detect_anomalies(const Report& report, std::size_t window, double threshold) {
    std::vector<std::optional<double>> ev;
    for (const auto& r : report.rows) ev.push_back(r.ev_mtg);
    return detect_anomalies(ev, window, threshold);
}

// ---------------------------------------------------------------------------
// Report computation

namespace detail {

template <typename F>
auto defined(F&& f) -> std::optional<decltype(f())> {
    try {
        return f();
    } catch (const UndefinedError&) {
        return std::nullopt;
    }
}

inline std::uint64_t month_seed(std::uint64_t seed, std::uint32_t month) {
    return seed * 0x9E3779B97F4A7C15ull + month;
}

inline NamedCorrelation correlate(const std::string& name, const std::vector<double>& x, const std::vector<double>& y) {
    NamedCorrelation c{name};
    c.pairs = x.size();
    try {
        c.value = pearson(x, y);
    } catch (const UndefinedError& e) {
        c.note = e.what();
    }
    return c;
}

inline void summarize(Report& report, const RunConfig& cfg, const std::optional<PriceSeries>& price) {
    auto& s = report.summary;
    const auto& rows = report.rows;
    auto first = std::find_if(rows.begin(), rows.end(), [](const MetricRow& r) { return r.cmtg_nodes > 0; });
    if (first != rows.end() && first->month < rows.back().month) {
        const auto& last = rows.back();
        s.rgr_nodes = rgr(static_cast<double>(first->cmtg_nodes), first->month, static_cast<double>(last.cmtg_nodes),
                          last.month);
        if (first->cmtg_edges > 0)
            s.rgr_edges = rgr(static_cast<double>(first->cmtg_edges), first->month,
                              static_cast<double>(last.cmtg_edges), last.month);
    }
    std::vector<SizePoint> points;
    for (const auto& r : rows)
        if (r.cmtg_nodes >= 2 && r.cmtg_edges >= 1)
            points.push_back({static_cast<double>(r.cmtg_nodes), static_cast<double>(r.cmtg_edges)});
    s.power_model = defined([&] { return fit_power_model(points); });

    s.price_present = price.has_value();
    if (price) {
        using Getter = std::optional<double> (*)(const MetricRow&);
        const std::pair<const char*, Getter> columns[] = {
            {"mtg_nodes", [](const MetricRow& r) -> std::optional<double> { return double(r.mtg_nodes); }},
            {"mtg_edges", [](const MetricRow& r) -> std::optional<double> { return double(r.mtg_edges); }},
            {"mtg_density", [](const MetricRow& r) { return r.mtg_density; }},
            {"cmtg_nodes", [](const MetricRow& r) -> std::optional<double> { return double(r.cmtg_nodes); }},
            {"cmtg_edges", [](const MetricRow& r) -> std::optional<double> { return double(r.cmtg_edges); }},
            {"cmtg_density", [](const MetricRow& r) { return r.cmtg_density; }},
        };
        for (const auto& [name, get] : columns) {
            std::map<YearMonth, double> series;
            for (const auto& r : rows)
                if (auto v = get(r)) series.emplace(report.genesis.plus(r.month), *v);
            try {
                auto paired = align_with_price(series, *price);
                auto c = correlate(name, paired.metric, paired.price);
                c.dropped = paired.dropped;
                s.price_correlations.push_back(c);
            } catch (const UndefinedError& e) {
                s.price_correlations.push_back(NamedCorrelation{name, std::nullopt, 0, 0, e.what()});
            }
        }
    }

    std::vector<double> nodes_c, clustering, nodes_q, clique;
    for (const auto& r : rows) {
        if (r.clustering) {
            nodes_c.push_back(double(r.cmtg_nodes));
            clustering.push_back(r.clustering->value);
        }
        if (r.max_clique) {
            nodes_q.push_back(double(r.cmtg_nodes));
            clique.push_back(double(*r.max_clique));
        }
    }
    s.size_correlations.push_back(correlate("clustering_vs_cmtg_nodes", nodes_c, clustering));
    s.size_correlations.push_back(correlate("max_clique_vs_cmtg_nodes", nodes_q, clique));

    if (rows.size() >= cfg.anomaly_window + 1)
        s.anomalies = detect_anomalies(report, cfg.anomaly_window, cfg.anomaly_threshold);
}

}  // namespace detail

/// Metrics for every month of a snapshot. MTG/CMTG folding is sequential;
/// the gated CMTG metrics of one month run concurrently.
inline Report compute_report(const GraphSnapshot& snap, const RunConfig& cfg,
                             const std::optional<PriceSeries>& price = std::nullopt) {
    if (snap.months.empty()) throw InputError("no records");
    Report report;
    report.coin = cfg.coin_name;
    report.genesis = snap.genesis;
    CumulativeGraph cmtg;
    const MonthlyGraph* prev = nullptr;
    for (const auto& mtg : snap.months) {
        accumulate_in_place(cmtg, mtg);
        MetricRow row;
        row.month = mtg.month;
        row.mtg_nodes = mtg.nodes.size();
        row.mtg_edges = mtg.undirected_edges.size();
        row.cmtg_nodes = cmtg.nodes.size();
        row.cmtg_edges = cmtg.undirected_edges.size();
        row.self_transfers = mtg.self_transfers;
        row.mtg_density = detail::defined([&] { return density(row.mtg_nodes, row.mtg_edges); });
        row.cmtg_density = detail::defined([&] { return density(row.cmtg_nodes, row.cmtg_edges); });
        row.ev_mtg = detail::defined([&] { return edge_vertex_ratio(row.mtg_nodes, row.mtg_edges); });
        row.ev_cmtg = detail::defined([&] { return edge_vertex_ratio(row.cmtg_nodes, row.cmtg_edges); });
        if (prev) {
            row.rr_nodes = detail::defined([&] { return repetition_ratio_nodes(mtg, *prev); });
            row.rr_edges = detail::defined([&] { return repetition_ratio_edges(mtg, *prev); });
        }

        std::vector<std::future<void>> jobs;
        Adjacency adj;
        const bool gated = row.cmtg_nodes <= cfg.node_cap;
        if (gated && (cfg.enabled.clustering || cfg.enabled.clique || cfg.enabled.assortativity)) {
            adj = Adjacency::of(cmtg);
            if (cfg.enabled.clustering)
                jobs.push_back(std::async(std::launch::async, [&] {
                    const auto n = cfg.clustering_samples.value_or(default_triad_samples(row.cmtg_nodes));
                    row.clustering = detail::defined(
                        [&] { return clustering_sampled(adj, n, detail::month_seed(cfg.seed, mtg.month.value)); });
                }));
            if (cfg.enabled.clique)
                jobs.push_back(std::async(std::launch::async, [&] {
                    auto q = max_clique(adj, cfg.clique_budget);
                    row.max_clique = q.size;
                    row.clique_exact = q.exact;
                }));
            if (cfg.enabled.assortativity)
                jobs.push_back(std::async(std::launch::async,
                                          [&] { row.assortativity = detail::defined([&] { return assortativity(adj); }); }));
        }
        if (cfg.enabled.power_law)
            for (auto v : {DegreeVariant::undirected, DegreeVariant::in, DegreeVariant::out, DegreeVariant::total})
                jobs.push_back(std::async(std::launch::async, [&, v] {
                    const auto deg = degree_sequence(cmtg, v);
                    row.alpha[static_cast<std::size_t>(v)] = detail::defined([&] {
                        return cfg.x_min.scan ? fit_power_law_scan(std::span<const std::uint32_t>(deg))
                                              : fit_power_law(deg, cfg.x_min.fixed);
                    });
                }));
        for (auto& j : jobs) j.get();

        if (cfg.edge_sample_size > 0 && !mtg.undirected_edges.empty()) {
            auto& out = report.edge_samples[mtg.month.value];
            for (const auto& e : sample_edges(mtg, cfg.edge_sample_size, detail::month_seed(cfg.seed, mtg.month.value)))
                out.emplace_back(snap.table.address(e.a), snap.table.address(e.b));
        }
        report.rows.push_back(std::move(row));
        prev = &mtg;
    }
    report.diagnostics = Diagnostics{snap.ingest.records, snap.ingest.skipped_lines, snap.ingest.opaque_endpoints,
                                     cmtg.self_transfers};
    detail::summarize(report, cfg, price);
    return report;
}

inline Report run_pipeline(const RunConfig& cfg) {
    std::optional<PriceSeries> price;
    if (cfg.price) {
        std::ifstream in(*cfg.price);
        if (!in) throw InputError("cannot open price file " + cfg.price->string());
        price = parse_price_csv(in);
    }
    GraphSnapshot snap;
    if (cfg.snapshot) {
        std::ifstream in(*cfg.snapshot, std::ios::binary);
        if (!in) throw InputError("cannot open snapshot " + cfg.snapshot->string());
        snap = read_snapshot(in);
    } else if (cfg.records) {
        snap = build_snapshot(*cfg.records, cfg.format.value_or(format_for(*cfg.records)), cfg.genesis_month,
                              ParseOptions{cfg.lenient});
    } else {
        throw InputError("no input: give a record file or a snapshot");
    }
    return compute_report(snap, cfg, price);
}

// ---------------------------------------------------------------------------
// Output

inline constexpr std::string_view kMonthlyHeader =
    "month,mtg_nodes,mtg_edges,cmtg_nodes,cmtg_edges,mtg_density,cmtg_density,ev_mtg,ev_cmtg,rr_nodes,rr_edges,"
    "assortativity,clustering,clustering_samples,max_clique,clique_exact,alpha_undirected,alpha_in,alpha_out,"
    "alpha_total";

namespace detail {

inline std::string num(double v) { return fmt::format("{}", v); }

template <typename T>
std::string cell(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_same_v<T, bool>)
        return *v ? "true" : "false";
    else if constexpr (std::is_floating_point_v<T>)
        return num(*v);
    else
        return std::to_string(*v);
}

inline std::optional<double> alpha_of(const MetricRow& r, DegreeVariant v) {
    const auto& f = r.alpha[static_cast<std::size_t>(v)];
    return f ? std::optional<double>(f->alpha) : std::nullopt;
}

template <typename T>
nlohmann::ordered_json json_or_null(const std::optional<T>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json to_json(const std::optional<GrowthRate>& g) {
    if (!g) return nullptr;
    return {{"rgr_per_month", g->rgr}, {"t1", g->t1.value}, {"t2", g->t2.value}, {"s1", g->s1}, {"s2", g->s2}};
}

inline nlohmann::ordered_json to_json(const NamedCorrelation& c) {
    nlohmann::ordered_json j;
    j["metric"] = c.name;
    j["pearson"] = json_or_null(c.value);
    j["pairs"] = c.pairs;
    if (!c.value) j["note"] = c.note;
    return j;
}

class CsvFile {
   public:
    explicit CsvFile(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }
    ~CsvFile() noexcept(false) {
        out_.flush();
        if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("failed writing " + path_.string());
    }
    template <typename... Cells>
    void row(const Cells&... cells) {
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << cells), ...);
        out_ << '\n';
    }
    std::ofstream& stream() { return out_; }

   private:
    std::ofstream out_;
    std::filesystem::path path_;
};

}  // namespace detail

inline void write_monthly_csv(std::ostream& out, const Report& report) {
    using detail::cell;
    out << kMonthlyHeader << '\n';
    for (const auto& r : report.rows) {
        std::optional<double> clustering;
        std::optional<std::uint64_t> samples;
        if (r.clustering) {
            clustering = r.clustering->value;
            samples = r.clustering->samples;
        }
        out << r.month.value << ',' << r.mtg_nodes << ',' << r.mtg_edges << ',' << r.cmtg_nodes << ','
            << r.cmtg_edges << ',' << cell(r.mtg_density) << ',' << cell(r.cmtg_density) << ',' << cell(r.ev_mtg)
            << ',' << cell(r.ev_cmtg) << ',' << cell(r.rr_nodes) << ',' << cell(r.rr_edges) << ','
            << cell(r.assortativity) << ',' << cell(clustering) << ',' << cell(samples) << ',' << cell(r.max_clique)
            << ',' << cell(r.clique_exact) << ',' << cell(detail::alpha_of(r, DegreeVariant::undirected)) << ','
            << cell(detail::alpha_of(r, DegreeVariant::in)) << ',' << cell(detail::alpha_of(r, DegreeVariant::out))
            << ',' << cell(detail::alpha_of(r, DegreeVariant::total)) << '\n';
    }
}

inline nlohmann::ordered_json summary_json(const Report& report) {
    const auto& s = report.summary;
    nlohmann::ordered_json j;
    j["coin"] = report.coin;
    j["genesis_month"] = report.genesis.to_string();
    j["months"] = report.rows.size();
    j["rgr"] = {{"cmtg_nodes", detail::to_json(s.rgr_nodes)}, {"cmtg_edges", detail::to_json(s.rgr_edges)}};
    if (s.power_model)
        j["power_model"] = {{"a", s.power_model->a},
                            {"b", s.power_model->b},
                            {"adjusted_r2", s.power_model->adjusted_r2},
                            {"n_points", s.power_model->n_points}};
    else
        j["power_model"] = nullptr;
    if (s.price_present) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& c : s.price_correlations) {
            auto cj = detail::to_json(c);
            cj["dropped_months"] = c.dropped;
            arr.push_back(cj);
        }
        j["price_correlations"] = arr;
    } else {
        j["price"] = "absent";
    }
    auto sizes = nlohmann::ordered_json::array();
    for (const auto& c : s.size_correlations) sizes.push_back(detail::to_json(c));
    j["size_correlations"] = sizes;
    auto anomalies = nlohmann::ordered_json::array();
    for (auto m : s.anomalies) anomalies.push_back(m.value);
    j["anomalies"] = anomalies;
    const auto& d = report.diagnostics;
    j["diagnostics"] = {{"records", d.records},
                        {"skipped_lines", d.skipped_lines},
                        {"opaque_endpoints", d.opaque_endpoints},
                        {"self_transfers", d.self_transfers}};
    return j;
}

/// monthly.csv, summary.json and plotdata/*.csv. Output bytes depend only on
/// the report.
inline std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    using detail::cell;
    std::vector<fs::path> written;
    fs::create_directories(dir / "plotdata");
    {
        detail::CsvFile f(dir / "monthly.csv");
        write_monthly_csv(f.stream(), report);
    }
    written.push_back(dir / "monthly.csv");
    {
        std::ofstream out(dir / "summary.json", std::ios::binary | std::ios::trunc);
        out << summary_json(report).dump(2) << '\n';
        if (!out) throw std::runtime_error("failed writing summary.json");
    }
    written.push_back(dir / "summary.json");

    auto plot = [&](const char* name, auto&& header, auto&& body) {
        const auto path = dir / "plotdata" / name;
        detail::CsvFile f(path);
        f.stream() << header << '\n';
        for (const auto& r : report.rows) body(f, r);
        written.push_back(path);
    };
    plot("sizes.csv", "month,mtg_nodes,mtg_edges,cmtg_nodes,cmtg_edges", [](auto& f, const MetricRow& r) {
        f.row(r.month.value, r.mtg_nodes, r.mtg_edges, r.cmtg_nodes, r.cmtg_edges);
    });
    plot("densities.csv", "month,mtg_density,cmtg_density",
         [](auto& f, const MetricRow& r) { f.row(r.month.value, cell(r.mtg_density), cell(r.cmtg_density)); });
    plot("edge_vertex_ratio.csv", "month,ev_mtg,ev_cmtg",
         [](auto& f, const MetricRow& r) { f.row(r.month.value, cell(r.ev_mtg), cell(r.ev_cmtg)); });
    plot("repetition_ratio.csv", "month,rr_nodes,rr_edges",
         [](auto& f, const MetricRow& r) { f.row(r.month.value, cell(r.rr_nodes), cell(r.rr_edges)); });
    plot("assortativity.csv", "month,cmtg_assortativity",
         [](auto& f, const MetricRow& r) { f.row(r.month.value, cell(r.assortativity)); });
    plot("alpha.csv", "month,alpha_undirected,alpha_in,alpha_out,alpha_total", [](auto& f, const MetricRow& r) {
        f.row(r.month.value, cell(detail::alpha_of(r, DegreeVariant::undirected)),
              cell(detail::alpha_of(r, DegreeVariant::in)), cell(detail::alpha_of(r, DegreeVariant::out)),
              cell(detail::alpha_of(r, DegreeVariant::total)));
    });
    plot("clustering_vs_nodes.csv", "cmtg_nodes,clustering", [](auto& f, const MetricRow& r) {
        if (r.clustering) f.row(r.cmtg_nodes, detail::num(r.clustering->value));
    });
    plot("clique_vs_nodes.csv", "cmtg_nodes,max_clique", [](auto& f, const MetricRow& r) {
        if (r.max_clique) f.row(r.cmtg_nodes, *r.max_clique);
    });
    plot("edges_vs_nodes.csv", "cmtg_nodes,cmtg_edges",
         [](auto& f, const MetricRow& r) { f.row(r.cmtg_nodes, r.cmtg_edges); });

    if (!report.edge_samples.empty()) {
        fs::create_directories(dir / "plotdata" / "edges");
        for (const auto& [month, edges] : report.edge_samples) {
            const auto path = dir / "plotdata" / "edges" / fmt::format("mtg_{:04}.csv", month);
            detail::CsvFile f(path);
            f.stream() << "src,dst\n";
            for (const auto& [a, b] : edges) {
                csv::write_field(f.stream(), a);
                f.stream() << ',';
                csv::write_field(f.stream(), b);
                f.stream() << '\n';
            }
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace txgraph
