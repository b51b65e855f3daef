#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "droughtcast/core.hpp"
#include "droughtcast/csv.hpp"

namespace droughtcast {

/// Occurrences of each intensity label (0, D0..D4) in one calendar year.
struct YearLabelCounts {
    int year = 0;
    std::array<std::size_t, kClassCount> counts{};
};

inline std::vector<YearLabelCounts> yearly_counts(std::span<const LabeledSample> samples) {
    std::map<int, std::array<std::size_t, kClassCount>> by_year;
    for (const auto& sample : samples)
        by_year[sample.date.year()][static_cast<std::size_t>(sample.intensity_class)]++;
    std::vector<YearLabelCounts> out;
    out.reserve(by_year.size());
    for (const auto& [year, counts] : by_year) out.push_back({year, counts});
    return out;
}

/// Inclusive calendar-year range.
struct Period {
    int first_year = 0;
    int last_year = 0;

    bool contains(int year) const { return year >= first_year && year <= last_year; }
    std::string to_string() const {
        return std::to_string(first_year) + "-" + std::to_string(last_year);
    }
};

/// The two built-in period comparisons.
inline std::pair<Period, Period> scenario_periods(int scenario) {
    if (scenario == 1) return {Period{2000, 2013}, Period{2014, 2020}};
    if (scenario == 2) return {Period{2007, 2013}, Period{2014, 2020}};
    throw ParameterError("scenario must be 1 or 2");
}

/// Per-label occurrence percentages of one county over a period; the six
/// values sum to 100. Absent when the county has no samples in the period.
inline std::optional<std::array<double, kClassCount>> period_percentages(
    std::span<const LabeledSample> samples, const std::string& fips, Period period,
    WarningCollector* warnings = nullptr) {
    std::array<std::size_t, kClassCount> counts{};
    std::size_t total = 0;
    for (const auto& sample : samples) {
        if (sample.fips != fips || !period.contains(sample.date.year())) continue;
        counts[static_cast<std::size_t>(sample.intensity_class)]++;
        ++total;
    }
    if (total == 0) {
        warn(warnings, "county " + fips + " has no samples in " + period.to_string());
        return std::nullopt;
    }
    std::array<double, kClassCount> percentages{};
    for (std::size_t k = 0; k < kClassCount; ++k)
        percentages[k] = 100.0 * static_cast<double>(counts[k]) / static_cast<double>(total);
    return percentages;
}

/// Percentage-point change of one label for one county between two periods.
struct CountyTrend {
    std::string fips;
    int label = 0;       // intensity class 0..5
    double pct_a = 0.0;  // period A percentage
    double pct_b = 0.0;  // period B percentage
    double delta = 0.0;  // pct_b - pct_a
};

struct ChangeSummary {
    std::vector<CountyTrend> trends;  // ordered by fips
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
    std::size_t n_zero = 0;
};

/// Delta of `label` occurrence percentage per county between period_a and
/// period_b, with strict positive/negative/zero county counts.
inline ChangeSummary change_summary(std::span<const LabeledSample> samples, int label,
                                    Period period_a, Period period_b,
                                    WarningCollector* warnings = nullptr) {
    if (label < 0 || static_cast<std::size_t>(label) >= kClassCount)
        throw ParameterError("label out of range");

    // county -> (counts in A, total A, counts in B, total B), one pass
    struct Tally {
        std::size_t label_a = 0, total_a = 0, label_b = 0, total_b = 0;
    };
    std::map<std::string, Tally> tallies;
    for (const auto& sample : samples) {
        Tally& tally = tallies[sample.fips];
        const bool hit = sample.intensity_class == label;
        if (period_a.contains(sample.date.year())) {
            ++tally.total_a;
            tally.label_a += hit;
        }
        if (period_b.contains(sample.date.year())) {
            ++tally.total_b;
            tally.label_b += hit;
        }
    }

    ChangeSummary summary;
    for (const auto& [fips, tally] : tallies) {
        if (tally.total_a == 0 || tally.total_b == 0) {
            warn(warnings, "county " + fips + " missing samples in " +
                               (tally.total_a == 0 ? period_a : period_b).to_string());
            continue;
        }
        CountyTrend trend;
        trend.fips = fips;
        trend.label = label;
        trend.pct_a = 100.0 * static_cast<double>(tally.label_a) / static_cast<double>(tally.total_a);
        trend.pct_b = 100.0 * static_cast<double>(tally.label_b) / static_cast<double>(tally.total_b);
        trend.delta = trend.pct_b - trend.pct_a;
        if (trend.delta > 0.0)
            ++summary.n_positive;
        else if (trend.delta < 0.0)
            ++summary.n_negative;
        else
            ++summary.n_zero;
        summary.trends.push_back(std::move(trend));
    }
    return summary;
}

/// GeoJSON FeatureCollection of county points carrying the trend deltas;
/// |delta| is the documented bubble size, the sign its color. Counties
/// without a coordinate are skipped with a warning.
inline nlohmann::json trends_geojson(std::span<const CountyTrend> trends,
                                     const std::map<std::string, CountyCoord>& coords,
                                     const std::map<std::string, std::string>& county_names,
                                     WarningCollector* warnings = nullptr) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& trend : trends) {
        const auto coord = coords.find(trend.fips);
        if (coord == coords.end()) {
            warn(warnings, "no coordinates for county " + trend.fips + "; skipped in map output");
            continue;
        }
        const auto name = county_names.find(trend.fips);
        nlohmann::json feature = {
            {"type", "Feature"},
            {"geometry",
             {{"type", "Point"},
              {"coordinates", {coord->second.longitude, coord->second.latitude}}}},
            {"properties",
             {{"fips", trend.fips},
              {"name", name == county_names.end() ? "" : name->second},
              {"label", label_name(trend.label)},
              {"pct_a", trend.pct_a},
              {"pct_b", trend.pct_b},
              {"delta", trend.delta}}}};
        features.push_back(std::move(feature));
    }
    return nlohmann::json{{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

inline void write_trends_csv(std::ostream& out, std::span<const CountyTrend> trends,
                             const std::map<std::string, std::string>& county_names) {
    std::vector<std::string> row = {"fips", "name", "label", "pct_a", "pct_b", "delta"};
    csv::write_row(out, row);
    for (const auto& trend : trends) {
        const auto name = county_names.find(trend.fips);
        row = {trend.fips,
               name == county_names.end() ? "" : name->second,
               label_name(trend.label),
               format_double(trend.pct_a),
               format_double(trend.pct_b),
               format_double(trend.delta)};
        csv::write_row(out, row);
    }
}

inline void write_yearly_counts_csv(std::ostream& out, std::span<const YearLabelCounts> years) {
    std::vector<std::string> row = {"year"};
    for (std::size_t k = 0; k < kClassCount; ++k) row.push_back(label_name(static_cast<int>(k)));
    csv::write_row(out, row);
    for (const auto& year : years) {
        row = {std::to_string(year.year)};
        for (auto count : year.counts) row.push_back(std::to_string(count));
        csv::write_row(out, row);
    }
}

}  // namespace droughtcast
