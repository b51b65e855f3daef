#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "droughtcast/rng.hpp"
#include "droughtcast/window.hpp"
#include "support/tempdir.hpp"

using namespace droughtcast;
using testutil::TempDir;

namespace {

DailyRecord day(const std::string& fips, int offset, double value,
                std::optional<double> score = std::nullopt) {
    DailyRecord record;
    record.fips = fips;
    record.date = Date::parse("2010-01-01").plus_days(offset);
    record.features.fill(value);
    record.score = score;
    return record;
}

/// Reference mean: scan the whole series per sample, no index arithmetic.
double naive_window_mean(std::span<const DailyRecord> daily, const WindowSample& sample,
                         std::size_t feature, int window_days) {
    double sum = 0.0;
    int count = 0;
    for (const auto& record : daily) {
        if (record.fips != sample.fips) continue;
        const int age = sample.date - record.date;
        if (age < 0 || age >= window_days) continue;
        sum += record.features[feature];
        ++count;
    }
    return sum / count;
}

}  // namespace

TEST_CASE("constant series aggregates to the constant") {
    std::vector<DailyRecord> daily;
    for (int t = 0; t < 90; ++t)
        daily.push_back(day("06001", t, 2.0, t == 89 ? std::optional<double>(1.0) : std::nullopt));
    const auto samples = build_window_samples(daily, 90);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].features[0] == Catch::Approx(2.0));
    CHECK(samples[0].window_len == 90);
    CHECK(samples[0].score == 1.0);
}

TEST_CASE("partial windows at the series start are kept") {
    std::vector<DailyRecord> daily;
    for (int t = 0; t < 10; ++t)
        daily.push_back(day("06001", t, t + 1.0, t == 9 ? std::optional<double>(0.5) : std::nullopt));
    const auto samples = build_window_samples(daily, 90);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].window_len == 10);
    CHECK(samples[0].features[0] == Catch::Approx(5.5));  // mean of 1..10
}

TEST_CASE("window_days=1 reproduces the raw values at score dates") {
    std::vector<DailyRecord> daily;
    Rng rng(11);
    for (int t = 0; t < 40; ++t)
        daily.push_back(day("06001", t, rng.next_unit() * 50.0,
                            t % 7 == 3 ? std::optional<double>(2.0) : std::nullopt));
    const auto samples = build_window_samples(daily, 1);
    std::size_t matched = 0;
    for (const auto& sample : samples) {
        for (const auto& record : daily) {
            if (record.date == sample.date) {
                CHECK(sample.features == record.features);
                CHECK(sample.window_len == 1);
                ++matched;
            }
        }
    }
    CHECK(matched == samples.size());
}

TEST_CASE("gaps inside the window divide by days present") {
    std::vector<DailyRecord> daily;
    daily.push_back(day("06001", 0, 1.0));
    daily.push_back(day("06001", 1, 2.0));
    // days 2..4 missing
    daily.push_back(day("06001", 5, 9.0, 3.0));
    const auto samples = build_window_samples(daily, 6);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].window_len == 3);
    CHECK(samples[0].features[0] == Catch::Approx(4.0));  // (1+2+9)/3
}

TEST_CASE("sample count equals scored-record count for any window") {
    std::vector<DailyRecord> daily;
    Rng rng(13);
    std::size_t scored = 0;
    for (const std::string fips : {"06001", "06003", "06005"}) {
        for (int t = 0; t < 60; ++t) {
            if (rng.next_unit() < 0.2) continue;  // gaps
            const bool has_score = rng.next_unit() < 0.25;
            scored += has_score;
            daily.push_back(day(fips, t, rng.next_unit(),
                                has_score ? std::optional<double>(1.0) : std::nullopt));
        }
    }
    for (int window : {1, 7, 30, 90})
        CHECK(build_window_samples(daily, window).size() == scored);
}

TEST_CASE("window means equal the naive per-sample oracle") {
    std::vector<DailyRecord> daily;
    Rng rng(17);
    for (const std::string fips : {"06001", "06003"}) {
        for (int t = 0; t < 120; ++t) {
            if (rng.next_unit() < 0.15) continue;
            DailyRecord record = day(fips, t, 0.0);
            for (auto& v : record.features) v = (rng.next_unit() - 0.5) * 40.0;
            if (rng.next_unit() < 0.3) record.score = 5.0 * rng.next_unit();
            daily.push_back(std::move(record));
        }
    }
    const int window_days = 90;
    const auto samples = build_window_samples(daily, window_days);
    REQUIRE(!samples.empty());
    for (const auto& sample : samples) {
        for (std::size_t f : {std::size_t(0), std::size_t(9), std::size_t(17)}) {
            const double expected = naive_window_mean(daily, sample, f, window_days);
            CHECK(sample.features[f] == Catch::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("window mean is bounded by in-window min and max") {
    std::vector<DailyRecord> daily;
    Rng rng(23);
    for (int t = 0; t < 200; ++t)
        daily.push_back(day("06001", t, (rng.next_unit() - 0.5) * 100.0,
                            t % 7 == 5 ? std::optional<double>(0.0) : std::nullopt));
    const auto samples = build_window_samples(daily, 90);
    for (const auto& sample : samples) {
        double lo = 1e300, hi = -1e300;
        for (const auto& record : daily) {
            const int age = sample.date - record.date;
            if (age < 0 || age >= 90) continue;
            lo = std::min(lo, record.features[0]);
            hi = std::max(hi, record.features[0]);
        }
        CHECK(sample.features[0] >= lo - 1e-9);
        CHECK(sample.features[0] <= hi + 1e-9);
    }
}

TEST_CASE("min/max/sum aggregators work as documented") {
    std::vector<DailyRecord> daily;
    for (int t = 0; t < 5; ++t)
        daily.push_back(day("06001", t, t + 1.0, t == 4 ? std::optional<double>(0.0) : std::nullopt));
    CHECK(build_window_samples(daily, 5, Aggregator::kMin)[0].features[0] == 1.0);
    CHECK(build_window_samples(daily, 5, Aggregator::kMax)[0].features[0] == 5.0);
    CHECK(build_window_samples(daily, 5, Aggregator::kSum)[0].features[0] == 15.0);
}

TEST_CASE("window parameter and input validation") {
    std::vector<DailyRecord> daily = {day("06001", 0, 1.0, 1.0)};
    CHECK_THROWS_AS(build_window_samples(daily, 0), ParameterError);
    CHECK(build_window_samples(std::vector<DailyRecord>{day("06001", 0, 1.0)}, 90).empty());

    std::vector<DailyRecord> unsorted = {day("06001", 5, 1.0), day("06001", 1, 1.0, 2.0)};
    CHECK_THROWS_AS(build_window_samples(unsorted, 90), ParameterError);
}

TEST_CASE("aggregate_all_dates emits one row per daily record") {
    std::vector<DailyRecord> daily;
    for (int t = 0; t < 12; ++t) daily.push_back(day("06001", t, t * 1.0));
    const auto rows = aggregate_all_dates(daily, 5);
    REQUIRE(rows.size() == daily.size());
    CHECK(rows[0].window_len == 1);
    CHECK(rows[11].window_len == 5);
    CHECK(rows[11].features[0] == Catch::Approx((7 + 8 + 9 + 10 + 11) / 5.0));
}

TEST_CASE("prepared csv round-trips exactly") {
    TempDir dir;
    std::vector<WindowSample> samples;
    Rng rng(29);
    for (int i = 0; i < 30; ++i) {
        WindowSample sample;
        sample.fips = i % 2 == 0 ? "06001" : "06003";
        sample.date = Date::parse("2001-01-02").plus_days(7 * i);
        for (auto& v : sample.features) v = (rng.next_unit() - 0.5) * 120.0;
        sample.score = 5.0 * rng.next_unit();
        sample.window_len = 1 + static_cast<int>(rng.below(90));
        samples.push_back(std::move(sample));
    }
    const auto path = dir.file("prepared.csv");
    write_prepared_csv(path, samples);
    const auto reread = read_prepared_csv(path);
    REQUIRE(reread.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(reread[i].fips == samples[i].fips);
        CHECK(reread[i].date == samples[i].date);
        CHECK(reread[i].features == samples[i].features);
        CHECK(reread[i].score == samples[i].score);
        CHECK(reread[i].window_len == samples[i].window_len);
    }
}

TEST_CASE("prepared csv rejects wrong schemas and empties") {
    TempDir dir;
    SECTION("17 feature columns") {
        std::string header = "fips,date";
        for (std::size_t f = 0; f + 1 < kFeatureCount; ++f)
            header += "," + std::string(kFeatureNames[f]);
        header += ",score,window_len";
        const auto path = dir.write("bad.csv", header + "\n");
        CHECK_THROWS_AS(read_prepared_csv(path), SchemaError);
    }
    SECTION("empty write refused") {
        CHECK_THROWS_AS(write_prepared_csv(dir.file("x.csv"), std::vector<WindowSample>{}),
                        ParameterError);
    }
}
