#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "txgraph/error.hpp"

namespace txgraph {

/// Reserved source address for coinbase (block reward) transactions.
inline constexpr std::string_view kSupernodeToken = "<coinbase>";
/// Stand-ins for shielded or otherwise unparseable endpoints, one per side.
inline constexpr std::string_view kOpaqueInputToken = "<opaque-in>";
inline constexpr std::string_view kOpaqueOutputToken = "<opaque-out>";

struct TxRecord {
    std::int64_t timestamp = 0;  // unix seconds, UTC
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool coinbase = false;

    friend bool operator==(const TxRecord&, const TxRecord&) = default;
};

inline void validate_address(std::string_view address) {
    if (address.empty()) throw InputError("empty address");
    if (std::any_of(address.begin(), address.end(),
                    [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }))
        throw InputError("address contains whitespace: '" + std::string(address) + "'");
    if (address.find(kSupernodeToken) != std::string_view::npos)
        throw InputError("address contains the reserved supernode token");
}

/// Throws InputError when the record breaks a TxRecord invariant.
inline void validate(const TxRecord& tx) {
    if (tx.outputs.empty()) throw InputError("transaction has no outputs");
    if (tx.coinbase && !tx.inputs.empty()) throw InputError("coinbase transaction with non-empty inputs");
    if (!tx.coinbase && tx.inputs.empty()) throw InputError("non-coinbase transaction with empty inputs");
    for (const auto& a : tx.inputs) validate_address(a);
    for (const auto& a : tx.outputs) validate_address(a);
}

/// Zero-based month offset from the genesis month.
struct MonthIndex {
    std::uint32_t value = 0;

    constexpr MonthIndex() = default;
    constexpr explicit MonthIndex(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(const MonthIndex&, const MonthIndex&) = default;
};

/// A UTC calendar month.
struct YearMonth {
    int year = 1970;
    unsigned month = 1;  // 1..12

    friend constexpr auto operator<=>(const YearMonth&, const YearMonth&) = default;

    constexpr std::int64_t ordinal() const { return std::int64_t{year} * 12 + (month - 1); }

    static constexpr YearMonth from_ordinal(std::int64_t ord) {
        std::int64_t y = ord >= 0 ? ord / 12 : (ord - 11) / 12;
        return YearMonth{static_cast<int>(y), static_cast<unsigned>(ord - y * 12 + 1)};
    }

    YearMonth plus(MonthIndex m) const { return from_ordinal(ordinal() + m.value); }

    static YearMonth of_timestamp(std::int64_t ts) {
        using namespace std::chrono;
        const auto day = floor<days>(sys_seconds{seconds{ts}});
        const year_month_day ymd{day};
        return YearMonth{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
    }

    /// Parses "YYYY-MM".
    static YearMonth parse(std::string_view text) {
        auto fail = [&] { return InputError("expected YYYY-MM, got '" + std::string(text) + "'"); };
        if (text.size() != 7 || text[4] != '-') throw fail();
        int y = 0;
        unsigned m = 0;
        auto r1 = std::from_chars(text.data(), text.data() + 4, y);
        auto r2 = std::from_chars(text.data() + 5, text.data() + 7, m);
        if (r1.ec != std::errc{} || r1.ptr != text.data() + 4 || r2.ec != std::errc{} || r2.ptr != text.data() + 7 ||
            m < 1 || m > 12)
            throw fail();
        return YearMonth{y, m};
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
        return buf;
    }
};

/// Whole calendar months between genesis and the month containing ts.
inline MonthIndex month_index(std::int64_t ts, YearMonth genesis) {
    const auto diff = YearMonth::of_timestamp(ts).ordinal() - genesis.ordinal();
    if (diff < 0)
        throw InputError("timestamp " + std::to_string(ts) + " precedes genesis month " + genesis.to_string());
    return MonthIndex{static_cast<std::uint32_t>(diff)};
}

enum class DataSource { file, explorer };

struct DatasetManifest {
    std::string coin_name;
    YearMonth genesis_month;
    std::uint64_t record_count = 0;
    DataSource source = DataSource::file;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

}  // namespace txgraph
