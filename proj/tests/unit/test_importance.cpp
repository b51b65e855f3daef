#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <set>

#include "droughtcast/importance.hpp"
#include "droughtcast/window.hpp"
#include "support/synth.hpp"
#include "support/params.hpp"

using namespace droughtcast;

namespace {

std::vector<WindowSample> synth_windows(int n_counties = 3, std::uint64_t seed = 7,
                                        int last_year = 2001) {
    synth::Options options;
    options.n_counties = n_counties;
    options.seed = seed;
    options.end = Date::from_ymd(last_year, 12, 31);
    const auto data = synth::make(options);
    return build_window_samples(data.daily, 90);
}

}  // namespace

TEST_CASE("a single-feature stump tree puts all importance on that feature") {
    Dataset data;
    data.cols = 5;
    for (int i = 0; i < 20; ++i)
        data.add_row(std::vector<double>{0, 0, 0, i < 10 ? 0.0 : 1.0, 0}, i < 10 ? 0 : 1);
    const auto forest = fit_forest(data, testutil::forest_params(4), 20);
    const auto importance = mdi_importance(forest);
    REQUIRE(importance.size() == 5);
    CHECK(importance[3] == Catch::Approx(1.0));
    for (std::size_t f : {0u, 1u, 2u, 4u}) CHECK(importance[f] == 0.0);
}

TEST_CASE("mdi importances are a probability vector") {
    const auto samples = synth_windows();
    const auto scaler = fit_scaler(samples);
    const auto labeled = label_samples(samples, scaler);
    const auto features = all_feature_indices();
    const Dataset data = make_dataset(labeled, features, true);

    ForestParams params;
    params.n_estimators = 10;
    params.tree.max_features = 4;
    const auto forest = fit_forest(data, params, 20);
    const auto importance = mdi_importance(forest);
    double sum = 0.0;
    for (double v : importance) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("an all-stump forest is a degenerate importance input") {
    Dataset data;
    data.cols = 2;
    for (int i = 0; i < 8; ++i) data.add_row(std::vector<double>{1.0, 2.0}, i % 2);
    // identical features: no split can help, every tree is a stump
    const auto forest = fit_forest(data, testutil::forest_params(3), 20);
    CHECK_THROWS_AS(mdi_importance(forest), DomainError);
}

TEST_CASE("collinearity pruning drops exactly one of a duplicated pair") {
    // independent noise columns except one exact duplicate
    Rng rng(5);
    std::vector<WindowSample> samples;
    for (int i = 0; i < 500; ++i) {
        WindowSample sample;
        sample.fips = "06001";
        sample.date = Date::parse("2000-01-04").plus_days(i);
        for (auto& v : sample.features) v = rng.next_unit();
        sample.features[5] = sample.features[3];  // T2MWET := T2M
        sample.score = 0.0;
        sample.window_len = 1;
        samples.push_back(std::move(sample));
    }
    const auto retained = collinearity_prune(samples, 0.95);
    CHECK(retained.size() == kFeatureCount - 1);
    const bool has_t2m = std::find(retained.begin(), retained.end(), 3u) != retained.end();
    const bool has_t2mwet = std::find(retained.begin(), retained.end(), 5u) != retained.end();
    CHECK(has_t2m != has_t2mwet);  // exactly one survives
}

TEST_CASE("threshold 1.0 keeps every feature") {
    const auto samples = synth_windows(2);
    CHECK(collinearity_prune(samples, 1.0).size() == kFeatureCount);
}

TEST_CASE("a planted r>0.95 pair is reduced and nothing unrelated is") {
    // fresh noise features, one pair strongly correlated
    Rng rng(9);
    std::vector<WindowSample> samples;
    for (int i = 0; i < 400; ++i) {
        WindowSample sample;
        sample.fips = "06001";
        sample.date = Date::parse("2000-01-04").plus_days(i);
        for (auto& v : sample.features) v = rng.next_unit();
        sample.features[7] = sample.features[2] + 0.02 * (rng.next_unit() - 0.5);  // plant
        sample.score = 0.0;
        sample.window_len = 1;
        samples.push_back(std::move(sample));
    }
    const auto retained = collinearity_prune(samples, 0.9);
    CHECK(retained.size() == kFeatureCount - 1);
    const bool has_2 = std::find(retained.begin(), retained.end(), 2u) != retained.end();
    const bool has_7 = std::find(retained.begin(), retained.end(), 7u) != retained.end();
    CHECK(has_2 != has_7);
}

TEST_CASE("zero-variance features warn and correlate to nothing") {
    auto samples = synth_windows(2);
    for (auto& sample : samples) sample.features[10] = 1.25;
    WarningCollector warnings;
    const auto retained = collinearity_prune(samples, 0.9, &warnings);
    CHECK(std::find(retained.begin(), retained.end(), 10u) != retained.end());
    bool mentioned = false;
    for (const auto& message : warnings.messages())
        mentioned = mentioned || message.find("WS10M") != std::string::npos;
    CHECK(mentioned);
}

TEST_CASE("family pruning keeps the nine base series") {
    const auto retained = family_prune();
    REQUIRE(retained.size() == 9);
    std::set<std::string> names;
    for (auto f : retained) names.insert(std::string(kFeatureNames[f]));
    CHECK(names == std::set<std::string>{"PRECTOT", "PS", "QV2M", "T2M", "T2MDEW", "T2MWET", "TS",
                                         "WS10M", "WS50M"});
    CHECK_FALSE(names.count("WS50M_RANGE"));
    CHECK(names.count("PRECTOT") == 1);
}

TEST_CASE("scenario runs are deterministic and recover the planted signal") {
    const auto samples = synth_windows(4, 11, 2002);
    ScenarioParams params;
    params.seed = 20;
    params.forest.n_estimators = 40;
    params.forest.tree.max_features = 4;

    const auto reports = run_scenarios(samples, params);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].scenario == "full");
    CHECK(reports[0].features.size() == kFeatureCount);
    CHECK(reports[1].scenario == "collinearity_pruned");
    CHECK(reports[1].features.size() < kFeatureCount);  // the planted T2MWET~T2M pair
    CHECK(reports[2].scenario == "family_pruned");
    CHECK(reports[2].features.size() == 9);

    for (const auto& report : reports) {
        double sum = 0.0;
        for (double v : report.importance) sum += v;
        CHECK(sum == Catch::Approx(1.0).margin(1e-9));
        CHECK(report.accuracy > 0.8);  // the planted signal is separable
        const auto top = report.top_features(3);
        CHECK(std::set<std::string>(top.begin(), top.end()) ==
              std::set<std::string>{"PRECTOT", "PS", "QV2M"});
    }

    const auto repeat = run_scenarios(samples, params);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(repeat[s].accuracy == reports[s].accuracy);
        CHECK(repeat[s].importance == reports[s].importance);
    }
}
