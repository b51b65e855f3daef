#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace droughtcast {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file header does not match the expected column set.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A data row could not be parsed; the message carries the line number.
class RowError : public Error {
public:
    using Error::Error;
};

/// Duplicate (fips, date) key within or across datasets.
class DuplicateError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Bad CLI flags or config file; maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Warnings
// ---------------------------------------------------------------------------

/// Collects non-fatal diagnostics (dropped rows, ignored columns, ...).
/// All library functions accept an optional collector; a null pointer
/// silently discards warnings.
class WarningCollector {
public:
    void add(std::string message) { messages_.push_back(std::move(message)); }
    std::size_t count() const { return messages_.size(); }
    const std::vector<std::string>& messages() const { return messages_; }

private:
    std::vector<std::string> messages_;
};

inline void warn(WarningCollector* sink, std::string message) {
    if (sink != nullptr) sink->add(std::move(message));
}

// ---------------------------------------------------------------------------
// Calendar dates
// ---------------------------------------------------------------------------

/// Day-resolution calendar date stored as days since 1970-01-01 (proleptic
/// Gregorian). Cheap to compare and subtract, which is all the window
/// arithmetic needs.
class Date {
public:
    Date() = default;

    static Date from_ymd(int year, int month, int day) {
        if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month))
            throw DomainError("invalid calendar date");
        return Date(days_from_civil(year, month, day));
    }

    static Date from_day_number(std::int32_t days) { return Date(days); }

    /// Strict YYYY-MM-DD.
    static Date parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-')
            throw DomainError("date not in YYYY-MM-DD form: '" + std::string(text) + "'");
        auto field = [&](std::size_t pos, std::size_t len) {
            int value = 0;
            const char* first = text.data() + pos;
            auto [ptr, ec] = std::from_chars(first, first + len, value);
            if (ec != std::errc() || ptr != first + len)
                throw DomainError("date not in YYYY-MM-DD form: '" + std::string(text) + "'");
            return value;
        };
        return from_ymd(field(0, 4), field(5, 2), field(8, 2));
    }

    std::int32_t day_number() const { return days_; }

    int year() const {
        auto [y, m, d] = civil_from_days(days_);
        (void)m;
        (void)d;
        return y;
    }

    std::string to_string() const {
        auto [y, m, d] = civil_from_days(days_);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, static_cast<unsigned>(m),
                      static_cast<unsigned>(d));
        return std::string(buf);
    }

    Date plus_days(std::int32_t n) const { return Date(days_ + n); }
    std::int32_t operator-(Date other) const { return days_ - other.days_; }

    friend auto operator<=>(Date, Date) = default;

private:
    explicit Date(std::int32_t days) : days_(days) {}

    static int days_in_month(int y, int m) {
        static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) return 29;
        return lengths[m - 1];
    }

    // Howard Hinnant's civil-days algorithms.
    static std::int32_t days_from_civil(int y, int m, int d) {
        y -= m <= 2;
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                             static_cast<unsigned>(d) - 1u;
        const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
        return era * 146097 + static_cast<int>(doe) - 719468;
    }

    static std::array<int, 3> civil_from_days(std::int32_t z) {
        z += 719468;
        const int era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const int y = static_cast<int>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp < 10 ? mp + 3 : mp - 9;
        return {y + (m <= 2 ? 1 : 0), static_cast<int>(m), static_cast<int>(d)};
    }

    std::int32_t days_ = 0;
};

// ---------------------------------------------------------------------------
// Feature catalog
// ---------------------------------------------------------------------------

inline constexpr std::size_t kFeatureCount = 18;

/// Canonical feature order; every feature vector, CSV column block and model
/// file follows it.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "PRECTOT", "PS",        "QV2M",      "T2M",         "T2MDEW",
    "T2MWET",  "T2M_MAX",   "T2M_MIN",   "T2M_RANGE",   "TS",
    "WS10M",   "WS10M_MAX", "WS10M_MIN", "WS10M_RANGE", "WS50M",
    "WS50M_MAX", "WS50M_MIN", "WS50M_RANGE"};

using FeatureVector = std::array<double, kFeatureCount>;

inline std::optional<std::size_t> feature_index(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (kFeatureNames[i] == name) return i;
    return std::nullopt;
}

// Drought intensity labels: class 0 = no drought, classes 1..5 = D0..D4.
inline constexpr std::size_t kClassCount = 6;

inline std::string label_name(int cls) {
    if (cls == 0) return "0";
    if (cls >= 1 && cls <= 5) return "D" + std::to_string(cls - 1);
    throw DomainError("intensity class out of range: " + std::to_string(cls));
}

inline int label_from_string(std::string_view text) {
    if (text == "0" || text == "none" || text == "None") return 0;
    if (text.size() == 2 && (text[0] == 'D' || text[0] == 'd') && text[1] >= '0' && text[1] <= '4')
        return text[1] - '0' + 1;
    throw DomainError("unknown drought label: '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Domain records
// ---------------------------------------------------------------------------

/// One row of the USDA-derived county registry.
struct FipsEntry {
    std::string fips;   // zero-padded 5-digit code
    std::string name;
    std::string state;  // 2-letter uppercase code
};

/// One county-day of meteorological measurements; the weekly drought score is
/// present only on rows that carry one.
struct DailyRecord {
    std::string fips;
    Date date;
    FeatureVector features{};
    std::optional<double> score;
};

struct CountyCoord {
    std::string fips;
    double latitude = 0.0;
    double longitude = 0.0;
};

/// One weekly observation after trailing-window aggregation.
struct WindowSample {
    std::string fips;
    Date date;
    FeatureVector features{};
    double score = 0.0;
    int window_len = 0;  // days actually present in the window, 1..window_days
};

/// A window sample after scaling and label discretization.
struct LabeledSample {
    std::string fips;
    Date date;
    FeatureVector features{};  // min-max scaled to [0,1]
    int intensity_class = 0;   // 0 = none, 1..5 = D0..D4
    bool presence = false;     // intensity_class >= 1
};

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Shortest round-trip representation; used for every number the artifact
/// writes so repeated runs produce byte-identical files.
inline std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw Error("to_chars failed");
    return std::string(buf, ptr);
}

inline std::optional<double> try_parse_double(std::string_view text) {
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

inline std::string format_int(std::int64_t value) { return std::to_string(value); }

/// Validates and zero-pads a county FIPS code to 5 digits.
inline std::string normalize_fips(std::string_view raw) {
    if (raw.empty() || raw.size() > 5) throw DomainError("bad FIPS code: '" + std::string(raw) + "'");
    for (char c : raw)
        if (c < '0' || c > '9') throw DomainError("bad FIPS code: '" + std::string(raw) + "'");
    std::string out(5 - raw.size(), '0');
    out.append(raw);
    return out;
}

}  // namespace droughtcast
