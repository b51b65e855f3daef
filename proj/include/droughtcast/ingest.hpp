#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "droughtcast/core.hpp"
#include "droughtcast/csv.hpp"

namespace droughtcast {

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

/// Column positions of the timeseries schema within one concrete file.
struct TimeseriesLayout {
    std::size_t fips = 0;
    std::size_t date = 0;
    std::array<std::size_t, kFeatureCount> features{};
    std::size_t score = 0;
};

inline TimeseriesLayout resolve_timeseries_header(const std::vector<std::string>& header,
                                                  const std::string& path,
                                                  WarningCollector* warnings) {
    std::map<std::string, std::size_t> positions;
    for (std::size_t i = 0; i < header.size(); ++i) positions.emplace(header[i], i);

    auto require = [&](const std::string& name) {
        auto it = positions.find(name);
        if (it == positions.end())
            throw SchemaError("'" + path + "': missing column '" + name + "'");
        return it->second;
    };

    TimeseriesLayout layout;
    layout.fips = require("fips");
    layout.date = require("date");
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        layout.features[f] = require(std::string(kFeatureNames[f]));
    layout.score = require("score");

    std::size_t known = 2 + kFeatureCount + 1;
    if (header.size() > known) {
        std::vector<std::string> extras;
        std::set<std::string> expected{"fips", "date", "score"};
        for (auto name : kFeatureNames) expected.insert(std::string(name));
        for (const auto& name : header)
            if (!expected.count(name)) extras.push_back(name);
        if (!extras.empty()) {
            std::string joined;
            for (const auto& e : extras) joined += (joined.empty() ? "" : ", ") + e;
            warn(warnings, "'" + path + "': ignoring extra columns: " + joined);
        }
    }
    return layout;
}

}  // namespace detail

/// Options for parse_timeseries_csv. `row_filter` (when set) drops rows whose
/// fips is not accepted before they are materialized, which keeps memory flat
/// when only one state is wanted from a nationwide file. `strict` rejects
/// rows with missing feature cells; the lenient mode drops them with a
/// warning instead.
struct ParseOptions {
    bool strict = true;
    std::function<bool(const std::string& fips)> row_filter;
};

/// Parses a timeseries CSV (fips, date, 18 features, score) into DailyRecords
/// in file order. Empty score cells become an absent score.
inline std::vector<DailyRecord> parse_timeseries_csv(const std::string& path,
                                                     WarningCollector* warnings = nullptr,
                                                     const ParseOptions& options = {}) {
    std::ifstream in = detail::open_input(path);
    csv::Reader reader(in);

    std::vector<std::string> fields;
    if (!reader.next(fields)) throw SchemaError("'" + path + "': empty file");
    const auto layout = detail::resolve_timeseries_header(fields, path, warnings);

    std::vector<DailyRecord> records;
    std::set<std::pair<std::string, std::int32_t>> seen;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        const std::string line = std::to_string(reader.line());
        if (fields.size() <= layout.score ||
            fields.size() <= *std::max_element(layout.features.begin(), layout.features.end()))
            throw RowError("'" + path + "' line " + line + ": too few fields");

        DailyRecord record;
        try {
            record.fips = normalize_fips(fields[layout.fips]);
            record.date = Date::parse(fields[layout.date]);
        } catch (const DomainError& e) {
            throw RowError("'" + path + "' line " + line + ": " + e.what());
        }

        bool incomplete = false;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            const std::string& cell = fields[layout.features[f]];
            if (cell.empty()) {
                if (options.strict)
                    throw RowError("'" + path + "' line " + line + ": missing value for " +
                                   std::string(kFeatureNames[f]));
                incomplete = true;
                break;
            }
            auto value = try_parse_double(cell);
            if (!value || !std::isfinite(*value))
                throw RowError("'" + path + "' line " + line + ": bad number '" + cell +
                               "' in " + std::string(kFeatureNames[f]));
            record.features[f] = *value;
        }
        if (incomplete) {
            warn(warnings, "'" + path + "' line " + line + ": dropped row with missing features");
            continue;
        }

        const std::string& score_cell = fields[layout.score];
        if (!score_cell.empty()) {
            auto value = try_parse_double(score_cell);
            if (!value || !std::isfinite(*value) || *value < 0.0 || *value > 5.0)
                throw RowError("'" + path + "' line " + line + ": bad score '" + score_cell + "'");
            record.score = *value;
        }

        if (options.row_filter && !options.row_filter(record.fips)) continue;

        if (!seen.emplace(record.fips, record.date.day_number()).second)
            throw DuplicateError("'" + path + "' line " + line + ": duplicate (fips, date) = (" +
                                 record.fips + ", " + record.date.to_string() + ")");
        records.push_back(std::move(record));
    }
    return records;
}

/// Inverse of parse_timeseries_csv; values written in shortest round-trip
/// form so reparsing reproduces the records bit for bit.
inline void write_timeseries_csv(std::ostream& out, std::span<const DailyRecord> records) {
    std::vector<std::string> row;
    row.reserve(kFeatureCount + 3);
    row = {"fips", "date"};
    for (auto name : kFeatureNames) row.emplace_back(name);
    row.emplace_back("score");
    csv::write_row(out, row);
    for (const auto& record : records) {
        row.clear();
        row.push_back(record.fips);
        row.push_back(record.date.to_string());
        for (double v : record.features) row.push_back(format_double(v));
        row.push_back(record.score ? format_double(*record.score) : "");
        csv::write_row(out, row);
    }
}

/// Concatenates the three time splits and sorts stably by (fips, date).
/// The splits must not share any (fips, date) key.
inline std::vector<DailyRecord> merge_splits(std::vector<DailyRecord> train,
                                             std::vector<DailyRecord> validation,
                                             std::vector<DailyRecord> test) {
    std::vector<DailyRecord> merged = std::move(train);
    merged.reserve(merged.size() + validation.size() + test.size());
    std::move(validation.begin(), validation.end(), std::back_inserter(merged));
    std::move(test.begin(), test.end(), std::back_inserter(merged));

    std::stable_sort(merged.begin(), merged.end(), [](const DailyRecord& a, const DailyRecord& b) {
        if (a.fips != b.fips) return a.fips < b.fips;
        return a.date < b.date;
    });
    auto dup = std::adjacent_find(merged.begin(), merged.end(),
                                  [](const DailyRecord& a, const DailyRecord& b) {
                                      return a.fips == b.fips && a.date == b.date;
                                  });
    if (dup != merged.end())
        throw DuplicateError("overlapping (fips, date) across splits: (" + dup->fips + ", " +
                             dup->date.to_string() + ")");
    return merged;
}

/// Parses the FIPS registry CSV (columns FIPS, Name, State).
inline std::vector<FipsEntry> parse_fips_csv(const std::string& path,
                                             WarningCollector* warnings = nullptr) {
    std::ifstream in = detail::open_input(path);
    csv::Reader reader(in);

    std::vector<std::string> fields;
    if (!reader.next(fields)) throw SchemaError("'" + path + "': empty file");
    std::map<std::string, std::size_t> positions;
    for (std::size_t i = 0; i < fields.size(); ++i) positions.emplace(fields[i], i);
    auto require = [&](const std::string& name) {
        auto it = positions.find(name);
        if (it == positions.end())
            throw SchemaError("'" + path + "': missing column '" + name + "'");
        return it->second;
    };
    const std::size_t fips_col = require("FIPS");
    const std::size_t name_col = require("Name");
    const std::size_t state_col = require("State");
    (void)warnings;

    std::vector<FipsEntry> entries;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        const std::string line = std::to_string(reader.line());
        if (fields.size() <= std::max({fips_col, name_col, state_col}))
            throw RowError("'" + path + "' line " + line + ": too few fields");
        FipsEntry entry;
        try {
            entry.fips = normalize_fips(fields[fips_col]);
        } catch (const DomainError& e) {
            throw RowError("'" + path + "' line " + line + ": " + e.what());
        }
        entry.name = fields[name_col];
        entry.state = fields[state_col];
        if (entry.state.size() != 2 ||
            !std::isupper(static_cast<unsigned char>(entry.state[0])) ||
            !std::isupper(static_cast<unsigned char>(entry.state[1])))
            throw RowError("'" + path + "' line " + line + ": bad state code '" + entry.state + "'");
        entries.push_back(std::move(entry));
    }
    return entries;
}

inline std::unordered_set<std::string> state_fips_set(std::span<const FipsEntry> registry,
                                                      const std::string& state) {
    std::unordered_set<std::string> fips;
    for (const auto& entry : registry)
        if (entry.state == state) fips.insert(entry.fips);
    return fips;
}

/// Keeps the records whose fips belongs to `state` per the registry. Records
/// with a fips missing from the registry are dropped with a warning.
inline std::vector<DailyRecord> filter_state(std::vector<DailyRecord> records,
                                             std::span<const FipsEntry> registry,
                                             const std::string& state,
                                             WarningCollector* warnings = nullptr) {
    if (registry.empty()) throw ParameterError("filter_state: empty FIPS registry");
    std::unordered_set<std::string> known;
    for (const auto& entry : registry) known.insert(entry.fips);
    const auto wanted = state_fips_set(registry, state);

    std::size_t unknown_count = 0;
    std::vector<DailyRecord> kept;
    kept.reserve(records.size());
    for (auto& record : records) {
        if (!known.count(record.fips)) {
            ++unknown_count;
            continue;
        }
        if (wanted.count(record.fips)) kept.push_back(std::move(record));
    }
    if (unknown_count > 0)
        warn(warnings, "filter_state: dropped " + std::to_string(unknown_count) +
                           " record(s) with fips absent from the registry");
    return kept;
}

/// Parses soil_data coordinates (fips, lat, lon; soil feature columns are
/// ignored). Duplicate fips rows are last-wins with a warning.
inline std::map<std::string, CountyCoord> parse_soil_coords(const std::string& path,
                                                            WarningCollector* warnings = nullptr) {
    std::ifstream in = detail::open_input(path);
    csv::Reader reader(in);

    std::vector<std::string> fields;
    if (!reader.next(fields)) throw SchemaError("'" + path + "': empty file");
    std::map<std::string, std::size_t> positions;
    for (std::size_t i = 0; i < fields.size(); ++i) positions.emplace(fields[i], i);
    auto find_any = [&](std::initializer_list<const char*> names) -> std::size_t {
        for (const char* name : names) {
            auto it = positions.find(name);
            if (it != positions.end()) return it->second;
        }
        std::string first = *names.begin();
        throw SchemaError("'" + path + "': missing column '" + first + "'");
    };
    const std::size_t fips_col = find_any({"fips", "FIPS"});
    const std::size_t lat_col = find_any({"lat", "Latitude", "latitude"});
    const std::size_t lon_col = find_any({"lon", "Longitude", "longitude"});

    std::map<std::string, CountyCoord> coords;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        const std::string line = std::to_string(reader.line());
        if (fields.size() <= std::max({fips_col, lat_col, lon_col}))
            throw RowError("'" + path + "' line " + line + ": too few fields");
        CountyCoord coord;
        try {
            coord.fips = normalize_fips(fields[fips_col]);
        } catch (const DomainError& e) {
            throw RowError("'" + path + "' line " + line + ": " + e.what());
        }
        auto lat = try_parse_double(fields[lat_col]);
        auto lon = try_parse_double(fields[lon_col]);
        if (!lat || !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0)
            throw RowError("'" + path + "' line " + line + ": malformed coordinate");
        coord.latitude = *lat;
        coord.longitude = *lon;
        auto [it, inserted] = coords.insert_or_assign(coord.fips, coord);
        (void)it;
        if (!inserted)
            warn(warnings, "'" + path + "' line " + line + ": duplicate fips " + coord.fips +
                               ", keeping the later row");
    }
    return coords;
}

}  // namespace droughtcast
