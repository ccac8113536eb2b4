#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "txgraph/error.hpp"
#include "txgraph/ingest.hpp"
#include "txgraph/records.hpp"

namespace txgraph {

struct ExplorerConfig {
    std::string base_url;
    std::string coin_code;
    double requests_per_second = 1.0;
    int max_retries = 5;
    double timeout_seconds = 30.0;
    std::uint64_t jitter_seed = 0;

    void check() const {
        if (!(requests_per_second > 0.0)) throw PreconditionError("requests_per_second must be positive");
        if (max_retries < 0) throw PreconditionError("max_retries must be non-negative");
    }
};

struct RawBlock {
    std::uint64_t height = 0;
    std::int64_t timestamp = 0;
    std::vector<nlohmann::json> transactions;
    bool malformed = false;  // no transactions at all
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Thrown by transports when a request times out or the connection fails.
class TransportError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// (method, url) -> (status, body). Tests inject canned responses.
using Transport = std::function<HttpResponse(const std::string& method, const std::string& url)>;

/// Time source for rate limiting and backoff; tests use ManualClock.
class Clock {
   public:
    virtual ~Clock() = default;
    virtual double now() = 0;  // seconds
    virtual void sleep_for(double seconds) = 0;
};

class SystemClock final : public Clock {
   public:
    double now() override {
        using namespace std::chrono;
        return duration<double>(steady_clock::now().time_since_epoch()).count();
    }
    void sleep_for(double seconds) override {
        if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
};

class ManualClock final : public Clock {
   public:
    double now() override { return t_; }
    void sleep_for(double seconds) override {
        if (seconds > 0) t_ += seconds;
    }
    void advance(double seconds) { t_ += seconds; }

   private:
    double t_ = 0.0;
};

/// Keeps request starts under `rate` per second over every 1 s window: at
/// most max(1, floor(rate)) starts in any half-open second, spaced at least
/// 1/rate apart.
class RateLimiter {
   public:
    explicit RateLimiter(double rate) : rate_(rate), burst_(std::max<std::size_t>(1, static_cast<std::size_t>(rate))) {}

    void acquire(Clock& clock) {
        double t = clock.now();
        if (last_) t = std::max(t, *last_ + 1.0 / rate_);
        while (!window_.empty() && window_.front() <= t - 1.0) window_.pop_front();
        if (window_.size() >= burst_) t = std::max(t, window_.front() + 1.0);
        clock.sleep_for(t - clock.now());
        t = std::max(t, clock.now());
        while (!window_.empty() && window_.front() <= t - 1.0) window_.pop_front();
        window_.push_back(t);
        last_ = t;
    }

   private:
    double rate_;
    std::size_t burst_;
    std::deque<double> window_;
    std::optional<double> last_;
};

class ExplorerError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};
class NotFoundError : public ExplorerError {
   public:
    using ExplorerError::ExplorerError;
};
class HttpError : public ExplorerError {
   public:
    HttpError(const std::string& what, int status) : ExplorerError(what), status_(status) {}
    int status() const { return status_; }

   private:
    int status_;
};
class RetriesExhaustedError : public ExplorerError {
   public:
    using ExplorerError::ExplorerError;
};
class SchemaError : public ExplorerError {
   public:
    using ExplorerError::ExplorerError;
};

struct NormalizeStats {
    std::uint64_t opaque_inputs = 0;
    std::uint64_t opaque_outputs = 0;
};

struct Checkpoint {
    std::int64_t last_height = -1;
};

inline std::optional<Checkpoint> read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        auto j = nlohmann::json::parse(in);
        return Checkpoint{j.at("last_height").get<std::int64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw InputError("bad checkpoint file " + path.string() + ": " + e.what());
    }
}

inline void write_checkpoint(const std::filesystem::path& path, Checkpoint cp) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << nlohmann::json{{"last_height", cp.last_height}}.dump() << '\n';
        out.flush();
        if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot write checkpoint " + path.string() + ": " + ec.message());
}

namespace detail {

inline bool has_entries(const nlohmann::json& tx, const char* key) {
    auto it = tx.find(key);
    return it != tx.end() && it->is_array() && !it->empty();
}

inline bool has_previous_output(const nlohmann::json& input) {
    if (!input.is_object() || input.contains("coinbase")) return false;
    auto it = input.find("from_output");
    return it != input.end() && !it->is_null();
}

}  // namespace detail

/// Converts an explorer block into records. A null address becomes the
/// opaque token for its side and is tallied in `stats`.
inline std::vector<TxRecord> normalize_block(const RawBlock& block, NormalizeStats* stats = nullptr) {
    NormalizeStats local;
    NormalizeStats& tally = stats ? *stats : local;
    std::vector<TxRecord> out;
    out.reserve(block.transactions.size());
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        const auto& tx = block.transactions[i];
        const auto where = "block " + std::to_string(block.height) + " tx " + std::to_string(i);
        if (!tx.is_object()) throw SchemaError(where + ": transaction is not an object");
        auto ins = tx.find("inputs");
        auto outs = tx.find("outputs");
        if (outs == tx.end() || !outs->is_array()) throw SchemaError(where + ": missing outputs");
        const bool have_inputs = ins != tx.end() && ins->is_array() && !ins->empty();

        TxRecord rec;
        rec.timestamp = block.timestamp;
        bool any_reference = false;
        if (have_inputs)
            for (const auto& in : *ins) any_reference |= detail::has_previous_output(in);
        if (i == 0 && !any_reference) {
            rec.coinbase = true;
        } else if (have_inputs) {
            for (const auto& in : *ins) {
                if (!in.is_object() || !in.contains("address"))
                    throw SchemaError(where + ": input without address field");
                const auto& addr = in["address"];
                if (addr.is_null()) {
                    rec.inputs.emplace_back(kOpaqueInputToken);
                    ++tally.opaque_inputs;
                } else if (addr.is_string()) {
                    rec.inputs.push_back(addr.get<std::string>());
                } else {
                    throw SchemaError(where + ": input address is not a string");
                }
            }
        } else if (detail::has_entries(tx, "vjoinsplit") || detail::has_entries(tx, "vShieldedSpend")) {
            rec.inputs.emplace_back(kOpaqueInputToken);
            ++tally.opaque_inputs;
        } else {
            throw SchemaError(where + ": transaction has neither inputs nor a coinbase marker");
        }
        for (const auto& o : *outs) {
            if (!o.is_object() || !o.contains("address")) throw SchemaError(where + ": output without address field");
            const auto& addr = o["address"];
            if (addr.is_null()) {
                rec.outputs.emplace_back(kOpaqueOutputToken);
                ++tally.opaque_outputs;
            } else if (addr.is_string()) {
                rec.outputs.push_back(addr.get<std::string>());
            } else {
                throw SchemaError(where + ": output address is not a string");
            }
        }
        if (rec.outputs.empty() &&
            (detail::has_entries(tx, "vjoinsplit") || detail::has_entries(tx, "vShieldedOutput"))) {
            rec.outputs.emplace_back(kOpaqueOutputToken);
            ++tally.opaque_outputs;
        }
        try {
            validate(rec);
        } catch (const InputError& e) {
            throw SchemaError(where + ": " + e.what());
        }
        out.push_back(std::move(rec));
    }
    return out;
}

/// One client per worker; at most one request in flight.
class ExplorerClient {
   public:
    struct Stats {
        std::uint64_t requests = 0;
        std::uint64_t retries = 0;
    };

    ExplorerClient(ExplorerConfig config, Transport transport, Clock& clock)
        : config_(std::move(config)), transport_(std::move(transport)), clock_(clock),
          limiter_(config_.requests_per_second), jitter_(config_.jitter_seed) {
        config_.check();
    }

    static constexpr double kBackoffBase = 1.0;
    static constexpr double kBackoffCap = 60.0;

    std::string block_url(std::uint64_t height) const {
        return config_.base_url + "/block/" + config_.coin_code + "/" + std::to_string(height);
    }

    /// GET one block. 5xx, 429 and transport failures are retried with
    /// jittered exponential backoff; 404 and other 4xx are permanent.
    RawBlock fetch_block(std::uint64_t height) {
        const auto url = block_url(height);
        for (int attempt = 0;; ++attempt) {
            limiter_.acquire(clock_);
            ++stats_.requests;
            std::optional<HttpResponse> resp;
            std::string failure;
            try {
                resp = transport_("GET", url);
            } catch (const TransportError& e) {
                failure = e.what();
            }
            if (resp) {
                if (resp->status == 200) return parse_block(height, resp->body);
                if (resp->status == 404) throw NotFoundError("block " + std::to_string(height) + " not found");
                if (resp->status >= 400 && resp->status < 500 && resp->status != 429)
                    throw HttpError("HTTP " + std::to_string(resp->status) + " for " + url, resp->status);
                failure = "HTTP " + std::to_string(resp->status);
            }
            if (attempt >= config_.max_retries)
                throw RetriesExhaustedError("giving up on " + url + " after " + std::to_string(attempt + 1) +
                                            " attempts: " + failure);
            ++stats_.retries;
            clock_.sleep_for(backoff(attempt));
        }
    }

    /// Delay before retry number attempt+1: min(cap, base 2^attempt) scaled
    /// by a uniform factor in [0.5, 1).
    double backoff(int attempt) {
        const double raw = std::min(kBackoffCap, kBackoffBase * std::ldexp(1.0, std::min(attempt, 30)));
        std::uniform_real_distribution<double> factor(0.5, 1.0);
        return raw * factor(jitter_);
    }

    /// Streams heights [from, to] into the sink. With a checkpoint path, the
    /// last completed height is recorded after every block and heights up
    /// to it are skipped on the next call.
    DatasetManifest fetch_range(std::uint64_t from, std::uint64_t to, RecordWriter& sink,
                                const std::optional<std::filesystem::path>& checkpoint = std::nullopt) {
        if (from > to) throw PreconditionError("fetch range has from > to");
        std::uint64_t start = from;
        if (checkpoint)
            if (auto cp = read_checkpoint(*checkpoint); cp && cp->last_height >= static_cast<std::int64_t>(from))
                start = static_cast<std::uint64_t>(cp->last_height) + 1;
        DatasetManifest manifest;
        manifest.coin_name = config_.coin_code;
        manifest.source = DataSource::explorer;
        std::optional<std::int64_t> earliest;
        for (std::uint64_t h = start; h <= to; ++h) {
            std::vector<TxRecord> records;
            try {
                records = normalize_block(fetch_block(h), &normalize_stats_);
            } catch (const NotFoundError&) {
                throw;
            } catch (const ExplorerError& e) {
                throw ExplorerError("height " + std::to_string(h) + ": " + e.what());
            }
            for (const auto& r : records) {
                sink.write(r);
                earliest = std::min(earliest.value_or(r.timestamp), r.timestamp);
            }
            sink.flush();
            manifest.record_count += records.size();
            if (checkpoint) write_checkpoint(*checkpoint, Checkpoint{static_cast<std::int64_t>(h)});
        }
        if (earliest) manifest.genesis_month = YearMonth::of_timestamp(*earliest);
        return manifest;
    }

    const Stats& stats() const { return stats_; }
    const NormalizeStats& normalize_stats() const { return normalize_stats_; }

   private:
    RawBlock parse_block(std::uint64_t height, const std::string& body) const {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("block " + std::to_string(height) + ": malformed JSON: " + e.what());
        }
        try {
            const auto& data = j.contains("data") ? j.at("data") : j;
            RawBlock block;
            block.height = data.at("block_no").get<std::uint64_t>();
            block.timestamp = data.at("time").get<std::int64_t>();
            const auto& txs = data.at("txs");
            if (!txs.is_array()) throw SchemaError("txs is not an array");
            block.transactions.assign(txs.begin(), txs.end());
            block.malformed = block.transactions.empty();
            if (block.height != height)
                throw SchemaError("asked for height " + std::to_string(height) + ", got " +
                                  std::to_string(block.height));
            return block;
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("block " + std::to_string(height) + ": " + e.what());
        }
    }

    ExplorerConfig config_;
    Transport transport_;
    Clock& clock_;
    RateLimiter limiter_;
    std::mt19937_64 jitter_;
    Stats stats_;
    NormalizeStats normalize_stats_;
};

}  // namespace txgraph
