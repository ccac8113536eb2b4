#pragma once

#include <charconv>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "txgraph/error.hpp"
#include "txgraph/records.hpp"

namespace txgraph {

struct ParseOptions {
    // Downgrades malformed lines to counted skips.
    bool lenient = false;
};

namespace csv {

/// Reads one RFC-4180 record. Quoted fields may span lines; `line` is
/// advanced by the number of physical lines consumed. Returns false at EOF.
inline bool read_row(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    ++line;
    std::string field;
    bool quoted = false;       // inside quotes
    bool was_quoted = false;   // current field started with a quote
    bool after_quote = false;  // closing quote seen, expecting delimiter
    const std::size_t start_line = line;
    for (;;) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) {
            if (quoted) throw InputError("unterminated quoted field", start_line);
            fields.push_back(std::move(field));
            return true;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                    after_quote = true;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = after_quote = false;
            continue;
        }
        if (ch == '\r' && in.peek() == '\n') continue;
        if (ch == '\n') {
            fields.push_back(std::move(field));
            return true;
        }
        if (after_quote) throw InputError("unexpected character after closing quote", line);
        if (ch == '"') {
            if (!field.empty() || was_quoted) throw InputError("stray quote in unquoted field", line);
            quoted = was_quoted = true;
            continue;
        }
        field.push_back(ch);
    }
}

inline bool needs_quoting(std::string_view s) { return s.find_first_of(",\"\r\n") != std::string_view::npos; }

inline void write_field(std::ostream& out, std::string_view s) {
    if (!needs_quoting(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace csv

namespace detail {

inline std::int64_t parse_int64(std::string_view s, std::size_t line) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw InputError("invalid integer timestamp '" + std::string(s) + "'", line);
    return v;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::size_t pos = 0;
    for (;;) {
        auto next = s.find(';', pos);
        out.emplace_back(s.substr(pos, next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline std::vector<std::string> string_array(const nlohmann::json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError(std::string("missing key '") + key + "'", line);
    if (!it->is_array()) throw InputError(std::string("key '") + key + "' must be an array", line);
    std::vector<std::string> out;
    out.reserve(it->size());
    for (const auto& e : *it) {
        if (!e.is_string()) throw InputError(std::string("key '") + key + "' must hold strings", line);
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace detail

/// Parses one JSONL object line into a validated TxRecord.
inline TxRecord parse_jsonl_line(std::string_view text, std::size_t line = 0) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!j.is_object()) throw InputError("expected a JSON object", line);
    TxRecord tx;
    auto ts = j.find("ts");
    if (ts == j.end()) throw InputError("missing key 'ts'", line);
    if (!ts->is_number_integer()) throw InputError("key 'ts' must be an integer", line);
    tx.timestamp = ts->get<std::int64_t>();
    tx.inputs = detail::string_array(j, "inputs", line);
    tx.outputs = detail::string_array(j, "outputs", line);
    auto cb = j.find("coinbase");
    if (cb == j.end()) throw InputError("missing key 'coinbase'", line);
    if (!cb->is_boolean()) throw InputError("key 'coinbase' must be a boolean", line);
    tx.coinbase = cb->get<bool>();
    try {
        validate(tx);
    } catch (const InputError& e) {
        throw InputError(e.what(), line);
    }
    return tx;
}

/// Streaming reader over JSONL, one record per line.
class JsonlReader {
   public:
    explicit JsonlReader(std::istream& in, ParseOptions opts = {}) : in_(in), opts_(opts) {}

    std::optional<TxRecord> next() {
        while (std::getline(in_, buf_)) {
            ++line_;
            if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
            try {
                return parse_jsonl_line(buf_, line_);
            } catch (const InputError&) {
                if (!opts_.lenient) throw;
                ++skipped_;
            }
        }
        return std::nullopt;
    }

    std::size_t skipped() const { return skipped_; }

   private:
    std::istream& in_;
    ParseOptions opts_;
    std::string buf_;
    std::size_t line_ = 0;
    std::size_t skipped_ = 0;
};

inline constexpr std::string_view kCsvHeader = "ts,inputs,outputs,coinbase";

/// Streaming reader over the ts,inputs,outputs,coinbase CSV layout.
class CsvReader {
   public:
    explicit CsvReader(std::istream& in, ParseOptions opts = {}) : in_(in), opts_(opts) {
        if (!csv::read_row(in_, fields_, line_)) throw InputError("missing CSV header", 1);
        if (fields_ != std::vector<std::string>{"ts", "inputs", "outputs", "coinbase"})
            throw InputError("expected header " + std::string(kCsvHeader), 1);
    }

    std::optional<TxRecord> next() {
        for (;;) {
            std::size_t row_line = line_ + 1;
            try {
                if (!csv::read_row(in_, fields_, line_)) return std::nullopt;
                return to_record(row_line);
            } catch (const InputError&) {
                if (!opts_.lenient) throw;
                ++skipped_;
            }
        }
    }

    std::size_t skipped() const { return skipped_; }

   private:
    TxRecord to_record(std::size_t line) const {
        if (fields_.size() != 4)
            throw InputError("expected 4 fields, got " + std::to_string(fields_.size()) + " (unquoted delimiter?)",
                             line);
        TxRecord tx;
        tx.timestamp = detail::parse_int64(fields_[0], line);
        tx.inputs = detail::split_list(fields_[1]);
        tx.outputs = detail::split_list(fields_[2]);
        if (fields_[3] == "true")
            tx.coinbase = true;
        else if (fields_[3] != "false")
            throw InputError("coinbase must be 'true' or 'false'", line);
        try {
            validate(tx);
        } catch (const InputError& e) {
            throw InputError(e.what(), line);
        }
        return tx;
    }

    std::istream& in_;
    ParseOptions opts_;
    std::vector<std::string> fields_;
    std::size_t line_ = 0;
    std::size_t skipped_ = 0;
};

template <typename Reader>
std::vector<TxRecord> read_all(Reader& reader) {
    std::vector<TxRecord> out;
    while (auto tx = reader.next()) out.push_back(std::move(*tx));
    return out;
}

inline std::vector<TxRecord> parse_jsonl(std::istream& in, ParseOptions opts = {}, std::size_t* skipped = nullptr) {
    JsonlReader reader(in, opts);
    auto out = read_all(reader);
    if (skipped) *skipped = reader.skipped();
    return out;
}

inline std::vector<TxRecord> parse_csv(std::istream& in, ParseOptions opts = {}, std::size_t* skipped = nullptr) {
    CsvReader reader(in, opts);
    auto out = read_all(reader);
    if (skipped) *skipped = reader.skipped();
    return out;
}

// ---------------------------------------------------------------------------
// Writers

class RecordWriter {
   public:
    virtual ~RecordWriter() = default;
    virtual void write(const TxRecord& tx) = 0;
    virtual void flush() = 0;
};

inline std::string to_jsonl_line(const TxRecord& tx) {
    nlohmann::ordered_json j;
    j["ts"] = tx.timestamp;
    j["inputs"] = tx.inputs;
    j["outputs"] = tx.outputs;
    j["coinbase"] = tx.coinbase;
    return j.dump();
}

class JsonlWriter final : public RecordWriter {
   public:
    explicit JsonlWriter(std::ostream& out) : out_(out) {}
    void write(const TxRecord& tx) override { out_ << to_jsonl_line(tx) << '\n'; }
    void flush() override { out_.flush(); }

   private:
    std::ostream& out_;
};

class CsvWriter final : public RecordWriter {
   public:
    /// Pass write_header=false when appending to an existing file.
    explicit CsvWriter(std::ostream& out, bool write_header = true) : out_(out) {
        if (write_header) out_ << kCsvHeader << '\n';
    }

    void write(const TxRecord& tx) override {
        out_ << tx.timestamp << ',';
        csv::write_field(out_, join(tx.inputs));
        out_ << ',';
        csv::write_field(out_, join(tx.outputs));
        out_ << ',' << (tx.coinbase ? "true" : "false") << '\n';
    }

    void flush() override { out_.flush(); }

   private:
    static std::string join(const std::vector<std::string>& list) {
        std::string s;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].find(';') != std::string::npos)
                throw InputError("address '" + list[i] + "' contains ';' and cannot be written as CSV");
            if (i) s.push_back(';');
            s += list[i];
        }
        return s;
    }

    std::ostream& out_;
};

// ---------------------------------------------------------------------------
// Month bucketing

/// Dense month → records map; index i holds month i. Gap months are empty.
using MonthBuckets = std::vector<std::vector<TxRecord>>;

/// Genesis month of a record set: the month of its earliest timestamp.
inline YearMonth genesis_of(const std::vector<TxRecord>& records) {
    if (records.empty()) throw InputError("no records");
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    for (const auto& r : records) lo = std::min(lo, r.timestamp);
    return YearMonth::of_timestamp(lo);
}

inline MonthBuckets bucket_by_month(std::vector<TxRecord> records, YearMonth genesis) {
    std::vector<MonthIndex> idx;
    idx.reserve(records.size());
    std::uint32_t last = 0;
    for (const auto& r : records) {
        idx.push_back(month_index(r.timestamp, genesis));
        last = std::max(last, idx.back().value);
    }
    MonthBuckets buckets;
    if (records.empty()) return buckets;
    buckets.resize(std::size_t{last} + 1);
    for (std::size_t i = 0; i < records.size(); ++i) buckets[idx[i].value].push_back(std::move(records[i]));
    return buckets;
}

// ---------------------------------------------------------------------------
// Manifest

inline nlohmann::ordered_json to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["coin_name"] = m.coin_name;
    j["genesis_month"] = m.genesis_month.to_string();
    j["record_count"] = m.record_count;
    j["source"] = m.source == DataSource::file ? "file" : "explorer";
    return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
    try {
        DatasetManifest m;
        m.coin_name = j.at("coin_name").get<std::string>();
        m.genesis_month = YearMonth::parse(j.at("genesis_month").get<std::string>());
        auto count = j.at("record_count");
        if (!count.is_number_integer() || count.get<std::int64_t>() < 0)
            throw InputError("record_count must be a non-negative integer");
        m.record_count = count.get<std::uint64_t>();
        const auto source = j.at("source").get<std::string>();
        if (source == "file")
            m.source = DataSource::file;
        else if (source == "explorer")
            m.source = DataSource::explorer;
        else
            throw InputError("unknown manifest source '" + source + "'");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad manifest: ") + e.what());
    }
}

}  // namespace txgraph
