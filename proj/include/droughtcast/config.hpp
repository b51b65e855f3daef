#pragma once

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "droughtcast/core.hpp"
#include "droughtcast/window.hpp"

namespace droughtcast {

/// Effective settings of a pipeline run. Defaults here, then config file,
/// then environment, then CLI flags; the CLI echoes the result to stderr so
/// every run records its provenance.
struct RunConfig {
    // dataset paths
    std::string train_path;
    std::string validation_path;
    std::string test_path;
    std::string fips_path;
    std::string soil_path;

    std::string state = "CA";
    int window_days = 90;
    std::string aggregator = "mean";

    std::uint64_t seed = 20;
    double test_fraction = 0.3;
    bool fit_scaler_on_train = false;  // default: fit on the full dataset

    std::array<int, 3> n_estimators = {100, 200, 300};
    int max_features = 4;  // floor(sqrt(18))
    int min_samples_leaf = 1;
    std::optional<int> max_depth;  // unlimited

    double collinearity_threshold = 0.9;
    int threads = 0;  // 0 = hardware concurrency

    std::string out_dir = ".";

    double train_fraction() const { return 1.0 - test_fraction; }

    void validate() const {
        if (!(test_fraction > 0.0 && test_fraction < 1.0))
            throw ConfigError("split fraction must lie in (0,1)");
        if (window_days < 1) throw ConfigError("window_days must be >= 1");
        for (int n : n_estimators)
            if (n < 1) throw ConfigError("n_estimators values must be >= 1");
        if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
        if (max_depth && *max_depth < 0) throw ConfigError("max_depth must be >= 0");
        if (!(collinearity_threshold > 0.0)) throw ConfigError("collinearity threshold must be > 0");
        aggregator_from_string(aggregator);  // throws on unknown name
    }
};

/// Applies `key = value` lines (# comments, blank lines allowed) onto the
/// config. Unknown keys are config errors.
inline void apply_config_entry(RunConfig& config, const std::string& key,
                               const std::string& value) {
    auto as_int = [&](const char* what) {
        auto parsed = try_parse_double(value);
        if (!parsed || *parsed != static_cast<int>(*parsed))
            throw ConfigError(std::string(what) + " must be an integer, got '" + value + "'");
        return static_cast<int>(*parsed);
    };
    auto as_double = [&](const char* what) {
        auto parsed = try_parse_double(value);
        if (!parsed) throw ConfigError(std::string(what) + " must be a number, got '" + value + "'");
        return *parsed;
    };

    if (key == "train") config.train_path = value;
    else if (key == "validation") config.validation_path = value;
    else if (key == "test") config.test_path = value;
    else if (key == "fips") config.fips_path = value;
    else if (key == "soil") config.soil_path = value;
    else if (key == "state") config.state = value;
    else if (key == "window_days") config.window_days = as_int("window_days");
    else if (key == "aggregator") config.aggregator = value;
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(as_double("seed"));
    else if (key == "test_fraction") config.test_fraction = as_double("test_fraction");
    else if (key == "fit_scaler_on_train")
        config.fit_scaler_on_train = value == "true" || value == "1";
    else if (key == "n_estimators") {
        std::array<int, 3> values{};
        std::size_t index = 0;
        std::string item;
        std::istringstream stream(value);
        while (std::getline(stream, item, ',')) {
            auto parsed = try_parse_double(item);
            if (!parsed || index >= values.size())
                throw ConfigError("n_estimators must be three comma-separated integers");
            values[index++] = static_cast<int>(*parsed);
        }
        if (index != values.size())
            throw ConfigError("n_estimators must be three comma-separated integers");
        config.n_estimators = values;
    } else if (key == "max_features") config.max_features = as_int("max_features");
    else if (key == "min_samples_leaf") config.min_samples_leaf = as_int("min_samples_leaf");
    else if (key == "max_depth") {
        const int depth = as_int("max_depth");
        if (depth < 0) config.max_depth.reset();
        else config.max_depth = depth;
    } else if (key == "collinearity_threshold")
        config.collinearity_threshold = as_double("collinearity_threshold");
    else if (key == "threads") config.threads = as_int("threads");
    else if (key == "out_dir") config.out_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

inline void load_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        const auto trim = [](std::string s) {
            const auto begin = s.find_first_not_of(" \t\r");
            if (begin == std::string::npos) return std::string();
            const auto end = s.find_last_not_of(" \t\r");
            return s.substr(begin, end - begin + 1);
        };
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto equals = stripped.find('=');
        if (equals == std::string::npos)
            throw ConfigError("'" + path + "' line " + std::to_string(line_no) +
                              ": expected key = value");
        apply_config_entry(config, trim(stripped.substr(0, equals)),
                           trim(stripped.substr(equals + 1)));
    }
}

inline void echo_config(std::ostream& out, const RunConfig& config) {
    out << "config:";
    if (!config.train_path.empty()) out << " train=" << config.train_path;
    if (!config.validation_path.empty()) out << " validation=" << config.validation_path;
    if (!config.test_path.empty()) out << " test=" << config.test_path;
    if (!config.fips_path.empty()) out << " fips=" << config.fips_path;
    if (!config.soil_path.empty()) out << " soil=" << config.soil_path;
    out << " state=" << config.state << " window_days=" << config.window_days
        << " aggregator=" << config.aggregator << " seed=" << config.seed
        << " test_fraction=" << format_double(config.test_fraction)
        << " fit_scaler_on_train=" << (config.fit_scaler_on_train ? "true" : "false")
        << " n_estimators=" << config.n_estimators[0] << ',' << config.n_estimators[1] << ','
        << config.n_estimators[2] << " max_features=" << config.max_features
        << " min_samples_leaf=" << config.min_samples_leaf << " max_depth="
        << (config.max_depth ? std::to_string(*config.max_depth) : std::string("none"))
        << " collinearity_threshold=" << format_double(config.collinearity_threshold)
        << " threads=" << config.threads << " out_dir=" << config.out_dir << '\n';
}

}  // namespace droughtcast
