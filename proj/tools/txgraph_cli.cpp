// txgraph: batch front end for the monthly transaction-graph toolkit.
//
// Exit codes: 0 success, 1 input error, 2 runtime or budget error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "txgraph/explorer_http.hpp"
#include "txgraph/txgraph.hpp"

namespace fs = std::filesystem;
using namespace txgraph;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitRuntime = 2;

std::optional<YearMonth> genesis_opt(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return YearMonth::parse(text);
}

RecordFormat parse_format(const std::string& name) {
    if (name == "csv") return RecordFormat::csv;
    if (name == "jsonl") return RecordFormat::jsonl;
    throw InputError("unknown format '" + name + "'");
}

std::unique_ptr<RecordWriter> make_writer(std::ostream& out, RecordFormat format, bool header) {
    if (format == RecordFormat::csv) return std::make_unique<CsvWriter>(out, header);
    return std::make_unique<JsonlWriter>(out);
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode extra = std::ios::trunc) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | extra);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
    auto out = open_out(path);
    out << to_json(m).dump(2) << '\n';
}

/// Reads a single numeric column; a non-numeric first line is a header.
std::vector<std::uint64_t> read_integer_column(std::istream& in) {
    std::vector<std::uint64_t> values;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc{} || p != line.data() + line.size()) {
            if (n == 1) continue;
            throw InputError("expected a non-negative integer", n);
        }
        values.push_back(v);
    }
    return values;
}

std::vector<SizePoint> read_size_points(std::istream& in) {
    std::vector<std::string> fields;
    std::size_t line = 0;
    if (!csv::read_row(in, fields, line) || fields != std::vector<std::string>{"nodes", "edges"})
        throw InputError("expected header nodes,edges", 1);
    std::vector<SizePoint> points;
    while (csv::read_row(in, fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != 2) throw InputError("expected 2 fields", line);
        try {
            points.push_back({std::stod(fields[0]), std::stod(fields[1])});
        } catch (const std::exception&) {
            throw InputError("invalid number", line);
        }
    }
    return points;
}

nlohmann::ordered_json fit_json(const PowerLawFit& f) {
    nlohmann::ordered_json j;
    j["alpha"] = f.alpha;
    j["x_min"] = f.x_min;
    j["n_tail"] = f.n_tail;
    j["log_likelihood"] = f.log_likelihood;
    j["normalization"] = f.normalization();
    j["estimator"] = f.estimator == PowerLawEstimator::discrete_mle ? "discrete_mle" : "closed_form";
    if (f.ks_distance) j["ks_distance"] = *f.ks_distance;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monthly and cumulative transaction graphs from blockchain records"};
    app.require_subcommand(1);

    // Flags shared by several subcommands.
    std::string genesis_text, price_path, out_path, format_name = "jsonl";
    std::uint64_t seed = 1;
    bool lenient = false;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a record file and optionally convert it");
    std::string ingest_in, manifest_path, coin = "coin";
    ingest->add_option("input", ingest_in, "JSONL or CSV record file")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", out_path, "Converted record file");
    ingest->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
    ingest->add_option("--manifest", manifest_path, "Write a dataset manifest here");
    ingest->add_option("--coin", coin, "Coin name for the manifest");
    ingest->add_option("--genesis-month", genesis_text, "YYYY-MM; default: month of the earliest record");
    ingest->add_flag("--lenient", lenient, "Count and skip malformed lines");

    // fetch
    auto* fetch = app.add_subcommand("fetch", "Download a block range from a JSON block explorer");
    ExplorerConfig explorer;
    std::uint64_t from = 0, to = 0;
    std::string checkpoint_path;
    fetch->add_option("--base-url", explorer.base_url, "Explorer API root")->required();
    fetch->add_option("--coin", explorer.coin_code, "Coin code in the API path")->required();
    fetch->add_option("--from", from, "First block height")->required();
    fetch->add_option("--to", to, "Last block height")->required();
    fetch->add_option("--out", out_path, "Record file to write (appended when resuming)")->required();
    fetch->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
    fetch->add_option("--checkpoint", checkpoint_path, "Checkpoint file for resumable runs");
    fetch->add_option("--manifest", manifest_path, "Write a dataset manifest here");
    fetch->add_option("--rps", explorer.requests_per_second, "Requests per second")->check(CLI::PositiveNumber);
    fetch->add_option("--retries", explorer.max_retries, "Retries per request")->check(CLI::NonNegativeNumber);
    fetch->add_option("--timeout", explorer.timeout_seconds, "Request timeout in seconds");
    fetch->add_option("--seed", explorer.jitter_seed, "Backoff jitter seed");

    // build
    auto* build = app.add_subcommand("build", "Build monthly graphs and save a snapshot");
    std::string build_in;
    build->add_option("input", build_in, "JSONL or CSV record file")->required()->check(CLI::ExistingFile);
    build->add_option("--out", out_path, "Snapshot file")->required();
    build->add_option("--genesis-month", genesis_text, "YYYY-MM");
    build->add_flag("--lenient", lenient, "Count and skip malformed lines");

    // run
    auto* run = app.add_subcommand("run", "Full pipeline: graphs, metrics, fits, reports");
    RunConfig cfg;
    std::string run_in, snapshot_path;
    std::uint64_t samples = 0, x_min = 1;
    double clique_seconds = 60;
    bool x_min_scan = false, no_clustering = false, no_clique = false, no_assortativity = false;
    run->add_option("input", run_in, "JSONL or CSV record file");
    run->add_option("--snapshot", snapshot_path, "Use a snapshot from `build` instead of records");
    run->add_option("--out", out_path, "Report directory")->required();
    run->add_option("--price", price_path, "month,price CSV");
    run->add_option("--genesis-month", genesis_text, "YYYY-MM");
    run->add_option("--coin", cfg.coin_name, "Coin name in summary.json");
    run->add_option("--seed", seed, "Seed for triad and edge sampling");
    run->add_option("--clique-cap", cfg.node_cap, "Skip clustering, clique and assortativity above this CMTG size");
    run->add_option("--samples", samples, "Triad samples per month (default min(1e6, 100|V|))");
    run->add_option("--clique-seconds", clique_seconds, "Clique search budget per month");
    run->add_option("--x-min", x_min, "Fixed x_min for power-law fits");
    run->add_flag("--x-min-scan", x_min_scan, "Choose x_min by minimum KS distance");
    run->add_option("--edge-samples", cfg.edge_sample_size, "Sampled MTG edges per month for plotting");
    run->add_option("--anomaly-threshold", cfg.anomaly_threshold, "Edge-to-vertex spike multiplier");
    run->add_option("--anomaly-window", cfg.anomaly_window, "Neighbouring months in the spike median");
    run->add_flag("--no-clustering", no_clustering);
    run->add_flag("--no-clique", no_clique);
    run->add_flag("--no-assortativity", no_assortativity);
    run->add_flag("--lenient", lenient, "Count and skip malformed lines");
    run->add_option("--format", format_name, "Input format when the extension is ambiguous")
        ->check(CLI::IsMember({"csv", "jsonl"}));

    // sample-edges
    auto* sample = app.add_subcommand("sample-edges", "Uniform edge sample of one month for plotting");
    std::uint32_t sample_month = 0;
    std::size_t sample_k = 5000;
    bool cumulative = false;
    sample->add_option("--snapshot", snapshot_path, "Snapshot from `build`")->required()->check(CLI::ExistingFile);
    sample->add_option("--month", sample_month, "Month index")->required();
    sample->add_option("-k,--count", sample_k, "Edges to sample")->check(CLI::PositiveNumber);
    sample->add_option("--seed", seed, "Sampling seed");
    sample->add_flag("--cumulative", cumulative, "Sample the CMTG instead of the MTG");
    sample->add_option("--out", out_path, "src,dst CSV (default stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "Standalone fitters");
    fit->require_subcommand(1);
    auto* fit_pl = fit->add_subcommand("power-law", "Fit alpha to a degree column");
    std::string fit_in;
    bool closed_form = false;
    fit_pl->add_option("--in", fit_in, "One degree per line")->required()->check(CLI::ExistingFile);
    fit_pl->add_option("--x-min", x_min, "Lower cutoff");
    fit_pl->add_flag("--scan", x_min_scan, "Choose x_min by minimum KS distance");
    fit_pl->add_flag("--closed-form", closed_form, "Use the closed-form approximation");
    auto* fit_pm = fit->add_subcommand("power-model", "Fit E = a V^b to nodes,edges rows");
    fit_pm->add_option("--in", fit_in, "nodes,edges CSV")->required()->check(CLI::ExistingFile);
    auto* fit_rgr = fit->add_subcommand("rgr", "Relative growth rate between two sizes");
    double s1 = 0, s2 = 0;
    std::uint32_t t1 = 0, t2 = 0;
    fit_rgr->add_option("--s1", s1)->required();
    fit_rgr->add_option("--t1", t1)->required();
    fit_rgr->add_option("--s2", s2)->required();
    fit_rgr->add_option("--t2", t2)->required();

    // correlate
    auto* correlate = app.add_subcommand("correlate", "Pearson correlation of a monthly.csv column with price");
    std::string report_path, column = "mtg_nodes";
    correlate->add_option("--report", report_path, "monthly.csv from `run`")->required()->check(CLI::ExistingFile);
    correlate->add_option("--column", column, "Column to correlate");
    correlate->add_option("--price", price_path, "month,price CSV")->required()->check(CLI::ExistingFile);
    correlate->add_option("--genesis-month", genesis_text, "Genesis month of the report")->required();

    // generate
    auto* generate = app.add_subcommand("generate", "Write a synthetic record file");
    SyntheticConfig synth;
    std::int64_t hub_month = -1;
    generate->add_option("--out", out_path, "Record file")->required();
    generate->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
    generate->add_option("--transactions", synth.transactions, "Transaction count");
    generate->add_option("--months", synth.months, "Month count");
    generate->add_option("--seed", synth.seed, "Generator seed");
    generate->add_option("--genesis-month", genesis_text, "YYYY-MM");
    generate->add_option("--hub-month", hub_month, "Inject a hub burst into this month");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;  // --help lands here too
    }

    try {
        if (*ingest) {
            const auto in_format = format_for(ingest_in);
            auto in = open_in(ingest_in);
            std::vector<TxRecord> records;
            std::size_t skipped = 0;
            records = in_format == RecordFormat::csv ? parse_csv(in, ParseOptions{lenient}, &skipped)
                                                     : parse_jsonl(in, ParseOptions{lenient}, &skipped);
            if (!out_path.empty()) {
                auto out = open_out(out_path);
                auto writer = make_writer(out, parse_format(format_name), true);
                for (const auto& r : records) writer->write(r);
                writer->flush();
            }
            DatasetManifest m{coin, YearMonth{}, records.size(), DataSource::file};
            if (!records.empty()) m.genesis_month = genesis_opt(genesis_text).value_or(genesis_of(records));
            if (!manifest_path.empty()) write_manifest(manifest_path, m);
            const auto months = records.empty() ? 0 : bucket_by_month(std::move(records), m.genesis_month).size();
            std::cout << "records: " << m.record_count << "\nskipped: " << skipped << "\nmonths: " << months << '\n';
        } else if (*fetch) {
            const auto format = parse_format(format_name);
            std::optional<fs::path> cp;
            bool resuming = false;
            if (!checkpoint_path.empty()) {
                cp = checkpoint_path;
                resuming = read_checkpoint(*cp).has_value() && fs::exists(out_path);
            }
            auto out = open_out(out_path, resuming ? std::ios::app : std::ios::trunc);
            auto writer = make_writer(out, format, !resuming);
            SystemClock clock;
            ExplorerClient client(explorer, make_http_transport(explorer.timeout_seconds), clock);
            const auto m = client.fetch_range(from, to, *writer, cp);
            if (!manifest_path.empty()) write_manifest(manifest_path, m);
            std::cout << "records: " << m.record_count << "\nrequests: " << client.stats().requests
                      << "\nretries: " << client.stats().retries
                      << "\nopaque inputs: " << client.normalize_stats().opaque_inputs
                      << "\nopaque outputs: " << client.normalize_stats().opaque_outputs << '\n';
        } else if (*build) {
            auto snap = build_snapshot(build_in, format_for(build_in), genesis_opt(genesis_text), ParseOptions{lenient});
            auto out = open_out(out_path);
            write_snapshot(out, snap);
            std::cout << "records: " << snap.ingest.records << "\nmonths: " << snap.months.size()
                      << "\naddresses: " << snap.table.size() - 1 << '\n';
        } else if (*run) {
            if (!run_in.empty()) cfg.records = run_in;
            if (!snapshot_path.empty()) cfg.snapshot = snapshot_path;
            if (!price_path.empty()) cfg.price = price_path;
            if (run->count("--format")) cfg.format = parse_format(format_name);
            cfg.out_dir = out_path;
            cfg.genesis_month = genesis_opt(genesis_text);
            cfg.lenient = lenient;
            cfg.seed = seed;
            if (samples > 0) cfg.clustering_samples = samples;
            cfg.clique_budget.time = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(clique_seconds));
            cfg.x_min = XMinPolicy{x_min, x_min_scan};
            cfg.enabled.clustering = !no_clustering;
            cfg.enabled.clique = !no_clique;
            cfg.enabled.assortativity = !no_assortativity;
            const auto report = run_pipeline(cfg);
            write_report(report, cfg.out_dir);
            std::cout << "months: " << report.rows.size() << "\nreport: " << cfg.out_dir.string() << '\n';
        } else if (*sample) {
            auto in = open_in(snapshot_path);
            const auto snap = read_snapshot(in);
            if (sample_month >= snap.months.size())
                throw InputError("snapshot has " + std::to_string(snap.months.size()) + " months");
            std::vector<Edge> edges;
            if (cumulative) {
                CumulativeGraph c;
                for (std::uint32_t m = 0; m <= sample_month; ++m) accumulate_in_place(c, snap.months[m]);
                edges = sample_edges(c, sample_k, seed);
            } else {
                edges = sample_edges(snap.months[sample_month], sample_k, seed);
            }
            if (out_path.empty()) {
                write_edge_csv(std::cout, edges, snap.table);
            } else {
                auto out = open_out(out_path);
                write_edge_csv(out, edges, snap.table);
            }
        } else if (*fit_pl) {
            auto in = open_in(fit_in);
            const auto degrees = read_integer_column(in);
            const auto est = closed_form ? PowerLawEstimator::closed_form : PowerLawEstimator::discrete_mle;
            const auto f = x_min_scan ? fit_power_law_scan(std::span<const std::uint64_t>(degrees), est)
                                      : fit_power_law(degrees, x_min, est);
            std::cout << fit_json(f).dump(2) << '\n';
        } else if (*fit_pm) {
            auto in = open_in(fit_in);
            const auto f = fit_power_model(read_size_points(in));
            nlohmann::ordered_json j{{"a", f.a}, {"b", f.b}, {"adjusted_r2", f.adjusted_r2}, {"n_points", f.n_points}};
            std::cout << j.dump(2) << '\n';
        } else if (*fit_rgr) {
            const auto g = rgr(s1, MonthIndex{t1}, s2, MonthIndex{t2});
            std::cout << nlohmann::ordered_json{{"rgr_per_month", g.rgr}}.dump(2) << '\n';
        } else if (*correlate) {
            const auto genesis = YearMonth::parse(genesis_text);
            auto pin = open_in(price_path);
            const auto price = parse_price_csv(pin);
            auto rin = open_in(report_path);
            std::vector<std::string> fields;
            std::size_t line = 0;
            if (!csv::read_row(rin, fields, line)) throw InputError("empty report");
            const auto col = std::find(fields.begin(), fields.end(), column);
            if (col == fields.end() || fields.front() != "month") throw InputError("report has no column " + column);
            const auto idx = static_cast<std::size_t>(col - fields.begin());
            std::map<YearMonth, double> series;
            while (csv::read_row(rin, fields, line)) {
                if (fields.size() <= idx || fields[idx].empty()) continue;
                series[genesis.plus(MonthIndex{static_cast<std::uint32_t>(std::stoul(fields[0]))})] =
                    std::stod(fields[idx]);
            }
            const auto paired = align_with_price(series, price);
            nlohmann::ordered_json j;
            j["metric"] = column;
            j["pearson"] = pearson(paired.metric, paired.price);
            j["pairs"] = paired.months.size();
            j["dropped_months"] = paired.dropped;
            std::cout << j.dump(2) << '\n';
        } else if (*generate) {
            if (auto g = genesis_opt(genesis_text)) synth.genesis = *g;
            if (hub_month >= 0) synth.hub = HubInjection{static_cast<std::uint32_t>(hub_month)};
            auto out = open_out(out_path);
            auto writer = make_writer(out, parse_format(format_name), true);
            generate_synthetic(synth, [&](TxRecord&& tx) { writer->write(tx); });
            writer->flush();
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const PreconditionError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const UndefinedError& e) {
        std::cerr << "undefined: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
