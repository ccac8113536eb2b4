#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "txgraph/records.hpp"

namespace txgraph {

/// Burst of hub activity in one month: `hubs` fresh addresses jointly pay
/// `leaves` fresh addresses, `leaves_per_tx` outputs per transaction, so the
/// month gains a complete bipartite hubs x leaves block.
struct HubInjection {
    std::uint32_t month = 1;
    std::uint32_t hubs = 40;
    std::uint32_t leaves = 4000;
    std::uint32_t leaves_per_tx = 100;
};

/// UTXO-style activity with preferential address reuse: an endpoint is a
/// fresh address with probability new_address_probability, otherwise a past
/// endpoint drawn uniformly from all earlier endpoint occurrences.
struct SyntheticConfig {
    std::uint32_t months = 12;
    std::uint64_t transactions = 100'000;  // spread over months, growing linearly
    YearMonth genesis{2011, 10};
    std::uint64_t seed = 1;
    double coinbase_fraction = 0.05;
    double new_address_probability = 0.35;
    std::uint32_t max_inputs = 3;
    std::uint32_t max_outputs = 3;
    std::optional<HubInjection> hub;
};

namespace detail {

inline std::int64_t month_start(YearMonth ym) {
    using namespace std::chrono;
    const sys_days d = year{ym.year} / month{ym.month} / day{1};
    return d.time_since_epoch().count() * std::int64_t{86400};
}

}  // namespace detail

/// Calls sink(TxRecord) for every generated record, month by month.
/// Deterministic for a given config.
template <typename Sink>
void generate_synthetic(const SyntheticConfig& cfg, Sink&& sink) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> n_in(1, cfg.max_inputs);
    std::uniform_int_distribution<std::uint32_t> n_out(1, cfg.max_outputs);
    std::vector<std::uint64_t> occurrences;
    std::uint64_t next_id = 0;
    auto name = [](std::uint64_t id) { return "a" + std::to_string(id); };
    auto endpoint = [&]() {
        std::uint64_t id;
        if (occurrences.empty() || unit(rng) < cfg.new_address_probability) {
            id = next_id++;
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, occurrences.size() - 1);
            id = occurrences[pick(rng)];
        }
        occurrences.push_back(id);
        return name(id);
    };

    const double weight_total = cfg.months * (cfg.months + 1) / 2.0;
    std::uint64_t emitted = 0;
    for (std::uint32_t m = 0; m < cfg.months; ++m) {
        const auto begin = detail::month_start(cfg.genesis.plus(MonthIndex{m}));
        const auto end = detail::month_start(cfg.genesis.plus(MonthIndex{m + 1}));
        std::uniform_int_distribution<std::int64_t> when(begin, end - 1);
        const std::uint64_t target =
            m + 1 == cfg.months ? cfg.transactions
                                : static_cast<std::uint64_t>(cfg.transactions * ((m + 1) * (m + 2) / 2.0) / weight_total);
        for (; emitted < target; ++emitted) {
            TxRecord tx;
            tx.timestamp = when(rng);
            if (unit(rng) < cfg.coinbase_fraction) {
                tx.coinbase = true;
                const auto k = n_out(rng) > 1 ? 2u : 1u;
                for (std::uint32_t i = 0; i < k; ++i) {
                    occurrences.push_back(next_id);
                    tx.outputs.push_back(name(next_id++));
                }
            } else {
                for (auto i = n_in(rng); i > 0; --i) tx.inputs.push_back(endpoint());
                for (auto i = n_out(rng); i > 0; --i) tx.outputs.push_back(endpoint());
            }
            sink(std::move(tx));
        }
        if (cfg.hub && cfg.hub->month == m) {
            const auto& h = *cfg.hub;
            std::vector<std::string> hubs;
            for (std::uint32_t i = 0; i < h.hubs; ++i) hubs.push_back("hub" + std::to_string(i));
            for (std::uint32_t done = 0; done < h.leaves;) {
                TxRecord tx;
                tx.timestamp = when(rng);
                tx.inputs = hubs;
                for (std::uint32_t k = 0; k < h.leaves_per_tx && done < h.leaves; ++k, ++done)
                    tx.outputs.push_back("leaf" + std::to_string(done));
                sink(std::move(tx));
            }
        }
    }
}

inline std::vector<TxRecord> generate_synthetic(const SyntheticConfig& cfg) {
    std::vector<TxRecord> out;
    generate_synthetic(cfg, [&](TxRecord&& tx) { out.push_back(std::move(tx)); });
    return out;
}

}  // namespace txgraph
