#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "droughtcast/pipeline.hpp"

namespace droughtcast::cli {

namespace detail {

/// Flag values layered over defaults and the config file. Only flags the
/// user actually passed (or set through DROUGHTCAST_* variables) override.
struct Overrides {
    std::optional<std::string> state, aggregator, out_dir, n_estimators;
    std::optional<int> window_days, max_features, min_samples_leaf, max_depth, threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> test_fraction, collinearity_threshold;
    bool fit_scaler_on_train = false;

    void apply(RunConfig& config) const {
        if (state) config.state = *state;
        if (aggregator) config.aggregator = *aggregator;
        if (out_dir) config.out_dir = *out_dir;
        if (n_estimators) apply_config_entry(config, "n_estimators", *n_estimators);
        if (window_days) config.window_days = *window_days;
        if (max_features) config.max_features = *max_features;
        if (min_samples_leaf) config.min_samples_leaf = *min_samples_leaf;
        if (max_depth) config.max_depth = *max_depth < 0 ? std::nullopt
                                                         : std::optional<int>(*max_depth);
        if (threads) config.threads = *threads;
        if (seed) config.seed = *seed;
        if (test_fraction) config.test_fraction = *test_fraction;
        if (collinearity_threshold) config.collinearity_threshold = *collinearity_threshold;
        if (fit_scaler_on_train) config.fit_scaler_on_train = true;
    }
};

inline void add_common_options(CLI::App& cmd, Overrides& overrides) {
    cmd.add_option("--seed", overrides.seed, "Master seed for every random choice")
        ->envname("DROUGHTCAST_SEED");
    cmd.add_option("--threads", overrides.threads, "Worker threads (0 = hardware)")
        ->envname("DROUGHTCAST_THREADS");
}

}  // namespace detail

/// Entry point used by the droughtcast binary and by in-process tests.
/// Exit codes: 0 success, 2 usage/config error, 1 runtime/data error.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& log = std::cerr) {
    CLI::App app{"droughtcast: California drought trend analysis and prediction"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key = value config file; flags override it")
        ->envname("DROUGHTCAST_CONFIG");

    detail::Overrides overrides;

    // prepare
    auto* prepare = app.add_subcommand(
        "prepare", "Merge the daily splits, filter to one state, window-aggregate");
    std::string train_path, validation_path, test_path, fips_path, out_csv;
    prepare->add_option("--train", train_path, "train_timeseries CSV")->required();
    prepare->add_option("--validation", validation_path, "validation_timeseries CSV")->required();
    prepare->add_option("--test", test_path, "test_timeseries CSV")->required();
    prepare->add_option("--fips", fips_path, "FIPS registry CSV (FIPS,Name,State)")->required();
    prepare->add_option("--state", overrides.state, "Two-letter state code (default CA)");
    prepare->add_option("--window-days", overrides.window_days, "Trailing window length");
    prepare->add_option("--aggregator", overrides.aggregator, "mean|min|max|sum");
    prepare->add_option("--out", out_csv, "Prepared-sample CSV to write")->required();
    detail::add_common_options(*prepare, overrides);

    // train
    auto* train = app.add_subcommand("train",
                                     "Train the three-forest soft-voting ensemble for one task");
    std::string data_csv, task;
    train->add_option("--data", data_csv, "Prepared-sample CSV")->required();
    train->add_option("--task", task, "presence or intensity")->required();
    train->add_option("--out-dir", overrides.out_dir, "Directory for models and reports");
    train->add_option("--test-fraction", overrides.test_fraction, "Test share (default 0.3)");
    train->add_option("--n-estimators", overrides.n_estimators,
                      "Three comma-separated tree counts (default 100,200,300)");
    train->add_option("--max-features", overrides.max_features, "Features sampled per node");
    train->add_option("--min-samples-leaf", overrides.min_samples_leaf, "Minimum leaf size");
    train->add_option("--max-depth", overrides.max_depth, "Depth cap (-1 = unlimited)");
    train->add_flag("--fit-on-train", overrides.fit_scaler_on_train,
                    "Fit the scaler on the train split only (default: full dataset)");
    detail::add_common_options(*train, overrides);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Re-derive a model's test split and report");
    std::string model_path, report_csv;
    bool present_only = false;
    evaluate->add_option("--model", model_path, "Persisted model file")->required();
    evaluate->add_option("--data", data_csv, "Prepared-sample CSV")->required();
    evaluate->add_option("--csv", report_csv, "Also write the report as CSV here");
    evaluate->add_flag("--present-only", present_only,
                       "Exclude support-0 classes from the macro average");
    detail::add_common_options(*evaluate, overrides);

    // predict
    auto* predict = app.add_subcommand("predict", "Apply a persisted model to new rows");
    std::string input_csv;
    bool daily_input = false;
    predict->add_option("--model", model_path, "Persisted model file")->required();
    predict->add_option("--input", input_csv, "Window-feature CSV (or raw dailies with --daily)")
        ->required();
    predict->add_flag("--daily", daily_input, "Input is raw daily rows; aggregate first");
    predict->add_option("--window-days", overrides.window_days, "Window length for --daily");
    predict->add_option("--out", out_csv, "Predictions CSV (default: stdout)");
    detail::add_common_options(*predict, overrides);

    // importance
    auto* importance = app.add_subcommand(
        "importance", "Feature-importance scenarios: full, collinearity-pruned, family-pruned");
    importance->add_option("--data", data_csv, "Prepared-sample CSV")->required();
    importance->add_option("--threshold", overrides.collinearity_threshold,
                           "Collinearity |r| threshold (default 0.9)");
    importance->add_option("--out", overrides.out_dir, "Directory for scenario CSVs");
    detail::add_common_options(*importance, overrides);

    // trends
    auto* trends = app.add_subcommand("trends",
                                      "County-level percentage-point changes between periods");
    int scenario = 1;
    std::string label_text, trends_out, yearly_out, soil_path;
    trends->add_option("--data", data_csv, "Prepared-sample CSV")->required();
    trends->add_option("--soil", soil_path, "soil_data CSV for county coordinates");
    trends->add_option("--fips", fips_path, "FIPS registry CSV for county names");
    trends->add_option("--scenario", scenario, "1 = 2000-2013 vs 2014-2020, 2 = 2007-2013 vs 2014-2020")
        ->required()
        ->check(CLI::IsMember({1, 2}));
    trends->add_option("--label", label_text, "Intensity label: 0 or D0..D4")->required();
    trends->add_option("--out", trends_out, "Map data file (.geojson/.json or .csv)");
    trends->add_option("--yearly-out", yearly_out, "Also write per-year label counts CSV");
    detail::add_common_options(*trends, overrides);

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("droughtcast");
    for (const auto& arg : args) argv.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        log << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        RunConfig config;
        if (!config_path.empty()) load_config_file(config, config_path);
        overrides.apply(config);
        if (!train_path.empty()) config.train_path = train_path;
        if (!validation_path.empty()) config.validation_path = validation_path;
        if (!test_path.empty()) config.test_path = test_path;
        if (!fips_path.empty()) config.fips_path = fips_path;
        if (!soil_path.empty()) config.soil_path = soil_path;

        echo_config(log, config);

        if (prepare->parsed()) {
            cmd_prepare(config, out_csv, out, log);
        } else if (train->parsed()) {
            cmd_train(config, data_csv, task, out, log);
        } else if (evaluate->parsed()) {
            cmd_evaluate(config, model_path, data_csv, report_csv, out, log, present_only);
        } else if (predict->parsed()) {
            cmd_predict(config, model_path, input_csv, daily_input, out_csv, out, log);
        } else if (importance->parsed()) {
            cmd_importance(config, data_csv, out, log);
        } else if (trends->parsed()) {
            cmd_trends(config, data_csv, scenario, label_text, trends_out, yearly_out, out, log);
        }
        return 0;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace droughtcast::cli
