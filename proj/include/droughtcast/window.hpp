#pragma once

#include <algorithm>
#include <fstream>
#include <map>

#include "droughtcast/core.hpp"
#include "droughtcast/csv.hpp"
#include "droughtcast/ingest.hpp"

namespace droughtcast {

/// Trailing-window statistic applied per feature. Mean keeps the original
/// units; the others exist as sweep variants.
enum class Aggregator { kMean, kMin, kMax, kSum };

inline Aggregator aggregator_from_string(const std::string& name) {
    if (name == "mean") return Aggregator::kMean;
    if (name == "min") return Aggregator::kMin;
    if (name == "max") return Aggregator::kMax;
    if (name == "sum") return Aggregator::kSum;
    throw ConfigError("unknown aggregator '" + name + "'");
}

inline std::string aggregator_name(Aggregator agg) {
    switch (agg) {
        case Aggregator::kMean: return "mean";
        case Aggregator::kMin: return "min";
        case Aggregator::kMax: return "max";
        case Aggregator::kSum: return "sum";
    }
    throw ParameterError("bad aggregator");
}

namespace detail {

/// Aggregates records[lo..hi] into `out`. The range is never empty.
inline void aggregate_range(std::span<const DailyRecord> records, std::size_t lo, std::size_t hi,
                            Aggregator agg, FeatureVector& out) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double acc = records[lo].features[f];
        for (std::size_t i = lo + 1; i <= hi; ++i) {
            const double v = records[i].features[f];
            switch (agg) {
                case Aggregator::kMean:
                case Aggregator::kSum: acc += v; break;
                case Aggregator::kMin: acc = std::min(acc, v); break;
                case Aggregator::kMax: acc = std::max(acc, v); break;
            }
        }
        if (agg == Aggregator::kMean) acc /= static_cast<double>(hi - lo + 1);
        out[f] = acc;
    }
}

struct CountySpan {
    std::size_t begin;
    std::size_t end;  // one past
};

/// The merged series is sorted by (fips, date); yields each county's range.
inline std::vector<CountySpan> county_spans(std::span<const DailyRecord> daily) {
    std::vector<CountySpan> spans;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= daily.size(); ++i) {
        if (i == daily.size() || daily[i].fips != daily[begin].fips) {
            spans.push_back({begin, i});
            begin = i;
        }
    }
    return spans;
}

}  // namespace detail

/// Builds one WindowSample per scored daily record: each feature is the
/// aggregate of its values over the `window_days` days ending on (and
/// including) the score date. Days missing from the series are simply not
/// counted; partial windows at a county's start are kept, with window_len
/// recording how many days were present. Input must be sorted by
/// (fips, date), as merge_splits produces.
inline std::vector<WindowSample> build_window_samples(std::span<const DailyRecord> daily,
                                                      int window_days = 90,
                                                      Aggregator agg = Aggregator::kMean) {
    if (window_days < 1) throw ParameterError("window_days must be >= 1");

    std::vector<WindowSample> samples;
    for (const auto& span : detail::county_spans(daily)) {
        for (std::size_t i = span.begin; i < span.end; ++i) {
            if (i > span.begin && daily[i].date <= daily[i - 1].date)
                throw ParameterError("daily series not date-sorted at " + daily[i].fips + " " +
                                     daily[i].date.to_string());
            if (!daily[i].score) continue;

            const Date window_start = daily[i].date.plus_days(-(window_days - 1));
            // First in-window index within this county's slice.
            std::size_t lo = i;
            while (lo > span.begin && daily[lo - 1].date >= window_start) --lo;

            WindowSample sample;
            sample.fips = daily[i].fips;
            sample.date = daily[i].date;
            sample.score = *daily[i].score;
            sample.window_len = static_cast<int>(i - lo + 1);
            detail::aggregate_range(daily, lo, i, agg, sample.features);
            samples.push_back(std::move(sample));
        }
    }
    return samples;
}

/// Window features at every date of the series, scored or not; used by the
/// predict command when fed raw dailies.
struct FeatureRow {
    std::string fips;
    Date date;
    FeatureVector features{};
    int window_len = 0;
};

inline std::vector<FeatureRow> aggregate_all_dates(std::span<const DailyRecord> daily,
                                                   int window_days = 90,
                                                   Aggregator agg = Aggregator::kMean) {
    if (window_days < 1) throw ParameterError("window_days must be >= 1");
    std::vector<FeatureRow> rows;
    rows.reserve(daily.size());
    for (const auto& span : detail::county_spans(daily)) {
        for (std::size_t i = span.begin; i < span.end; ++i) {
            const Date window_start = daily[i].date.plus_days(-(window_days - 1));
            std::size_t lo = i;
            while (lo > span.begin && daily[lo - 1].date >= window_start) --lo;
            FeatureRow row;
            row.fips = daily[i].fips;
            row.date = daily[i].date;
            row.window_len = static_cast<int>(i - lo + 1);
            detail::aggregate_range(daily, lo, i, agg, row.features);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Prepared-sample CSV: fips,date,<18 features>,score,window_len
// ---------------------------------------------------------------------------

inline void write_prepared_csv(std::ostream& out, std::span<const WindowSample> samples) {
    std::vector<std::string> row = {"fips", "date"};
    for (auto name : kFeatureNames) row.emplace_back(name);
    row.emplace_back("score");
    row.emplace_back("window_len");
    csv::write_row(out, row);
    for (const auto& sample : samples) {
        row.clear();
        row.push_back(sample.fips);
        row.push_back(sample.date.to_string());
        for (double v : sample.features) row.push_back(format_double(v));
        row.push_back(format_double(sample.score));
        row.push_back(format_int(sample.window_len));
        csv::write_row(out, row);
    }
}

inline void write_prepared_csv(const std::string& path, std::span<const WindowSample> samples) {
    if (samples.empty()) throw ParameterError("refusing to write an empty prepared dataset");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_prepared_csv(out, samples);
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::vector<WindowSample> read_prepared_csv(std::istream& in, const std::string& path) {
    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw SchemaError("'" + path + "': empty file");

    std::vector<std::string> expected = {"fips", "date"};
    for (auto name : kFeatureNames) expected.emplace_back(name);
    expected.emplace_back("score");
    expected.emplace_back("window_len");
    if (fields != expected) {
        std::string got;
        for (const auto& f : fields) got += (got.empty() ? "" : ",") + f;
        throw SchemaError("'" + path + "': prepared-sample header mismatch; got [" + got + "]");
    }

    std::vector<WindowSample> samples;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        const std::string line = std::to_string(reader.line());
        if (fields.size() != expected.size())
            throw RowError("'" + path + "' line " + line + ": wrong field count");
        WindowSample sample;
        try {
            sample.fips = normalize_fips(fields[0]);
            sample.date = Date::parse(fields[1]);
        } catch (const DomainError& e) {
            throw RowError("'" + path + "' line " + line + ": " + e.what());
        }
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            auto value = try_parse_double(fields[2 + f]);
            if (!value || !std::isfinite(*value))
                throw RowError("'" + path + "' line " + line + ": bad number '" + fields[2 + f] + "'");
            sample.features[f] = *value;
        }
        auto score = try_parse_double(fields[2 + kFeatureCount]);
        if (!score || !std::isfinite(*score) || *score < 0.0 || *score > 5.0)
            throw RowError("'" + path + "' line " + line + ": bad score");
        sample.score = *score;
        auto len = try_parse_double(fields[3 + kFeatureCount]);
        if (!len || !std::isfinite(*len) || *len < 1.0)
            throw RowError("'" + path + "' line " + line + ": bad window_len");
        sample.window_len = static_cast<int>(*len);
        samples.push_back(std::move(sample));
    }
    return samples;
}

inline std::vector<WindowSample> read_prepared_csv(const std::string& path) {
    std::ifstream in = detail::open_input(path);
    return read_prepared_csv(in, path);
}

}  // namespace droughtcast
