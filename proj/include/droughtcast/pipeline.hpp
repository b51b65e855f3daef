#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "droughtcast/config.hpp"
#include "droughtcast/forest.hpp"
#include "droughtcast/importance.hpp"
#include "droughtcast/ingest.hpp"
#include "droughtcast/metrics.hpp"
#include "droughtcast/model_io.hpp"
#include "droughtcast/preprocess.hpp"
#include "droughtcast/trends.hpp"
#include "droughtcast/window.hpp"

namespace droughtcast {

namespace detail {

inline void flush_warnings(const WarningCollector& warnings, std::ostream& log) {
    for (const auto& message : warnings.messages()) log << "warning: " << message << '\n';
}

/// Writes through a temp file and renames into place, so a failed command
/// leaves no partial artifact behind.
class AtomicFile {
public:
    explicit AtomicFile(std::string path)
        : path_(std::move(path)), temp_path_(path_ + ".tmp"), out_(temp_path_, std::ios::binary) {
        if (!out_) throw IoError("cannot open '" + temp_path_ + "' for writing");
    }

    std::ostream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw IoError("write failed for '" + temp_path_ + "'");
        out_.close();
        std::filesystem::rename(temp_path_, path_);
        committed_ = true;
    }

    ~AtomicFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(temp_path_, ec);
        }
    }

private:
    std::string path_;
    std::string temp_path_;
    std::ofstream out_;
    bool committed_ = false;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

/// merge splits -> filter to the configured state -> window-aggregate ->
/// write the prepared-sample CSV. Returns the sample count.
inline std::size_t cmd_prepare(const RunConfig& config, const std::string& out_csv,
                               std::ostream& out, std::ostream& log) {
    config.validate();
    WarningCollector warnings;

    const auto registry = parse_fips_csv(config.fips_path, &warnings);
    std::unordered_set<std::string> known;
    for (const auto& entry : registry) known.insert(entry.fips);
    const auto wanted = state_fips_set(registry, config.state);
    if (wanted.empty())
        throw Error("no counties registered for state '" + config.state + "'");

    // Out-of-state and unregistered rows are dropped at parse time so a
    // nationwide input never materializes; unknown-fips drops are counted
    // here because filter_state will not see them.
    std::size_t unknown_dropped = 0;
    ParseOptions options;
    options.row_filter = [&](const std::string& fips) {
        if (wanted.count(fips) > 0) return true;
        if (known.count(fips) == 0) ++unknown_dropped;
        return false;
    };

    auto merged = merge_splits(parse_timeseries_csv(config.train_path, &warnings, options),
                               parse_timeseries_csv(config.validation_path, &warnings, options),
                               parse_timeseries_csv(config.test_path, &warnings, options));
    if (unknown_dropped > 0)
        warn(&warnings, "dropped " + std::to_string(unknown_dropped) +
                            " record(s) with fips absent from the registry");
    merged = filter_state(std::move(merged), registry, config.state, &warnings);

    const auto samples = build_window_samples(merged, config.window_days,
                                              aggregator_from_string(config.aggregator));
    if (samples.empty()) throw Error("no scored rows after filtering; nothing to prepare");

    detail::AtomicFile file(out_csv);
    write_prepared_csv(file.stream(), samples);
    file.commit();

    std::size_t counties = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (i == 0 || samples[i].fips != samples[i - 1].fips) ++counties;

    detail::flush_warnings(warnings, log);
    out << samples.size() << " rows, " << (kFeatureCount + 1) << " feature+score columns\n";
    out << counties << " counties, window " << config.window_days << " days ("
        << config.aggregator << ")\n";
    return samples.size();
}

// ---------------------------------------------------------------------------
// train / evaluate
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_intensity_task(const std::string& task) {
    if (task == "intensity") return true;
    if (task == "presence") return false;
    throw ConfigError("task must be 'presence' or 'intensity'");
}

/// Window rows belonging to the task, in file order.
inline std::vector<WindowSample> task_windows(std::span<const WindowSample> samples,
                                              bool intensity) {
    std::vector<WindowSample> rows;
    for (const auto& sample : samples)
        if (!intensity || discretize_score(sample.score) >= 1) rows.push_back(sample);
    return rows;
}

inline ScalerParams fit_task_scaler(const RunConfig& config,
                                    std::span<const WindowSample> all_samples,
                                    std::span<const WindowSample> task_rows) {
    if (!config.fit_scaler_on_train) return fit_scaler(all_samples);
    // Leakage-free alternative: fit only on the rows the split will train on.
    const auto order = shuffled_order(task_rows.size(), config.seed);
    const std::size_t train_count = train_count_for(task_rows.size(), config.train_fraction());
    std::vector<WindowSample> train_rows;
    train_rows.reserve(train_count);
    for (std::size_t i = 0; i < train_count; ++i) train_rows.push_back(task_rows[order[i]]);
    return fit_scaler(train_rows);
}

inline ForestParams forest_params_for(const RunConfig& config, int n_estimators) {
    ForestParams params;
    params.n_estimators = n_estimators;
    params.tree.max_features = config.max_features;
    params.tree.min_samples_leaf = config.min_samples_leaf;
    params.tree.max_depth = config.max_depth;
    return params;
}

inline std::shared_ptr<const Classifier> train_variant(const Dataset& train,
                                                       const RunConfig& config, int variant,
                                                       bool intensity) {
    const std::uint64_t seed =
        derive_seed(config.seed, kPurposeVariant, static_cast<std::uint64_t>(variant));
    const ForestParams params = forest_params_for(config, config.n_estimators[variant]);
    if (!intensity)
        return std::make_shared<ForestModel>(fit_forest(train, params, seed, config.threads));
    BinaryFactory factory = [&](const Dataset& binary, std::uint64_t binary_seed) {
        return std::make_shared<ForestModel>(
            fit_forest(binary, params, binary_seed, config.threads));
    };
    return std::make_shared<OvrModel>(fit_ovr(train, factory, seed, {1, 2, 3, 4, 5}));
}

inline ClassReport evaluate_on(const Classifier& model, const Dataset& test) {
    std::vector<int> truth(test.labels.begin(), test.labels.end());
    std::vector<int> pred(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) pred[i] = predict_class(model, test.row(i));
    return class_report(truth, pred, model.classes());
}

inline std::vector<std::string> canonical_feature_names() {
    std::vector<std::string> names;
    names.reserve(kFeatureCount);
    for (auto name : kFeatureNames) names.emplace_back(name);
    return names;
}

}  // namespace detail

/// scale -> split -> train the three forest variants (OneVsRest-wrapped for
/// the intensity task) -> soft-voting ensemble -> persist the ensemble and
/// print per-model and ensemble reports.
inline void cmd_train(const RunConfig& config, const std::string& data_csv,
                      const std::string& task, std::ostream& out, std::ostream& log) {
    config.validate();
    const bool intensity = detail::is_intensity_task(task);
    WarningCollector warnings;

    const auto samples = read_prepared_csv(data_csv);
    const auto rows = detail::task_windows(samples, intensity);
    const ScalerParams scaler = detail::fit_task_scaler(config, samples, rows);
    const auto labeled = label_samples(rows, scaler);
    const auto split = split_train_test(labeled, config.seed, config.train_fraction());

    const auto features = all_feature_indices();
    const Dataset train = make_dataset(split.train, features, !intensity);
    const Dataset test = make_dataset(split.test, features, !intensity);
    log << "train " << train.rows() << " rows, test " << test.rows() << " rows\n";

    std::vector<std::shared_ptr<const Classifier>> variants;
    for (int v = 0; v < 3; ++v) {
        variants.push_back(detail::train_variant(train, config, v, intensity));
        const auto report = detail::evaluate_on(*variants.back(), test);
        const std::string title = "RandomForest " + std::to_string(v + 1) + " (n_estimators=" +
                                  std::to_string(config.n_estimators[v]) + ")" +
                                  (intensity ? " with OneVsRest" : "");
        out << render_report(report, title) << '\n';
    }
    const auto ensemble = std::make_shared<VotingEnsemble>(variants);
    const auto ensemble_report = detail::evaluate_on(*ensemble, test);
    out << render_report(ensemble_report,
                         "VotingEnsemble (soft) of RandomForest 1, 2 and 3")
        << '\n';

    ModelBundle bundle;
    bundle.task = task;
    bundle.feature_names = detail::canonical_feature_names();
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        bundle.scaler.emplace_back(scaler.min[f], scaler.max[f]);
    bundle.seed = config.seed;
    bundle.train_fraction = config.train_fraction();
    bundle.model = ensemble;

    std::filesystem::create_directories(config.out_dir);
    const std::string model_path =
        (std::filesystem::path(config.out_dir) / (task + "_ensemble.model")).string();
    detail::AtomicFile model_file(model_path);
    save_model(model_file.stream(), bundle);
    model_file.commit();

    const std::string report_path =
        (std::filesystem::path(config.out_dir) / (task + "_ensemble_report.csv")).string();
    detail::AtomicFile report_file(report_path);
    write_report_csv(report_file.stream(), ensemble_report);
    report_file.commit();

    detail::flush_warnings(warnings, log);
    log << "model written to " << model_path << '\n';
}

namespace detail {

/// Scales the model's feature columns of a prepared sample with the bundle's
/// stored min/max.
inline std::vector<double> bundle_scaled_row(const ModelBundle& bundle,
                                             const FeatureVector& raw,
                                             std::span<const std::size_t> canonical_indices) {
    std::vector<double> x(bundle.feature_names.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto [lo, hi] = bundle.scaler[j];
        const double range = hi - lo;
        x[j] = range <= 0.0 ? 0.0 : std::clamp((raw[canonical_indices[j]] - lo) / range, 0.0, 1.0);
    }
    return x;
}

inline std::vector<std::size_t> bundle_feature_indices(const ModelBundle& bundle) {
    std::vector<std::size_t> indices;
    for (const auto& name : bundle.feature_names) {
        const auto idx = feature_index(name);
        if (!idx) throw SchemaError("model uses unknown feature '" + name + "'");
        indices.push_back(*idx);
    }
    return indices;
}

}  // namespace detail

/// Re-derives the bundle's test split on the given prepared data and prints
/// its report; optionally also writes the machine-readable CSV.
inline ClassReport cmd_evaluate(const RunConfig&, const std::string& model_path,
                                const std::string& data_csv, const std::string& report_csv,
                                std::ostream& out, std::ostream& log,
                                bool present_only = false) {
    const ModelBundle bundle = load_model(model_path);
    const bool intensity = detail::is_intensity_task(bundle.task);
    const auto samples = read_prepared_csv(data_csv);
    const auto rows = detail::task_windows(samples, intensity);
    const auto indices = detail::bundle_feature_indices(bundle);

    const auto order = shuffled_order(rows.size(), bundle.seed);
    const std::size_t train_count = train_count_for(rows.size(), bundle.train_fraction);

    std::vector<int> truth;
    std::vector<int> pred;
    for (std::size_t i = train_count; i < order.size(); ++i) {
        const auto& sample = rows[order[i]];
        const int cls = discretize_score(sample.score);
        truth.push_back(intensity ? cls : (cls >= 1 ? 1 : 0));
        const auto x = detail::bundle_scaled_row(bundle, sample.features, indices);
        pred.push_back(predict_class(*bundle.model, x));
    }
    const auto report = class_report(truth, pred, bundle.model->classes(), present_only);
    out << render_report(report, "Evaluation of " + model_path + " (" + bundle.task + " task)");

    if (!report_csv.empty()) {
        detail::AtomicFile file(report_csv);
        write_report_csv(file.stream(), report);
        file.commit();
        log << "report written to " << report_csv << '\n';
    }
    return report;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

namespace detail {

struct PredictInputRow {
    std::string fips;
    Date date;
    FeatureVector features{};
};

/// Reads a feature CSV for prediction: needs fips, date and the model's
/// feature columns; anything else (score, window_len, unused features) is
/// ignored. Missing model features become a schema error that lists both
/// sides.
inline std::vector<PredictInputRow> read_predict_csv(const std::string& path,
                                                     const ModelBundle& bundle) {
    std::ifstream in = open_input(path);
    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw SchemaError("'" + path + "': empty file");

    std::map<std::string, std::size_t> positions;
    for (std::size_t i = 0; i < fields.size(); ++i) positions.emplace(fields[i], i);
    std::vector<std::string> missing;
    for (const auto& name : bundle.feature_names)
        if (!positions.count(name)) missing.push_back(name);
    if (!positions.count("fips") || !positions.count("date") || !missing.empty()) {
        std::string expected = "fips, date";
        for (const auto& name : bundle.feature_names) expected += ", " + name;
        std::string found;
        for (const auto& f : fields) found += (found.empty() ? "" : ", ") + f;
        throw SchemaError("'" + path + "': expected columns [" + expected + "], found [" + found +
                          "]");
    }
    const std::size_t fips_col = positions.at("fips");
    const std::size_t date_col = positions.at("date");

    std::vector<PredictInputRow> rows;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        const std::string line = std::to_string(reader.line());
        PredictInputRow row;
        try {
            row.fips = normalize_fips(fields.at(fips_col));
            row.date = Date::parse(fields.at(date_col));
        } catch (const DomainError& e) {
            throw RowError("'" + path + "' line " + line + ": " + e.what());
        }
        for (const auto& name : bundle.feature_names) {
            const std::size_t col = positions.at(name);
            if (col >= fields.size())
                throw RowError("'" + path + "' line " + line + ": too few fields");
            auto value = try_parse_double(fields[col]);
            if (!value || !std::isfinite(*value))
                throw RowError("'" + path + "' line " + line + ": bad number in " + name);
            row.features[*feature_index(name)] = *value;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

/// Applies a persisted model to new rows: either already-aggregated window
/// features or raw dailies (then the trailing window is aggregated at every
/// date first). Emits fips, date, predicted class and per-class
/// probabilities.
inline void cmd_predict(const RunConfig& config, const std::string& model_path,
                        const std::string& input_csv, bool daily_input,
                        const std::string& out_csv, std::ostream& out, std::ostream& log) {
    const ModelBundle bundle = load_model(model_path);
    const auto indices = detail::bundle_feature_indices(bundle);
    WarningCollector warnings;

    std::vector<detail::PredictInputRow> rows;
    if (daily_input) {
        const auto daily = parse_timeseries_csv(input_csv, &warnings);
        auto sorted = merge_splits(daily, {}, {});
        for (const auto& window :
             aggregate_all_dates(sorted, config.window_days,
                                 aggregator_from_string(config.aggregator)))
            rows.push_back({window.fips, window.date, window.features});
    } else {
        rows = detail::read_predict_csv(input_csv, bundle);
    }

    const auto& classes = bundle.model->classes();
    auto write_predictions = [&](std::ostream& sink) {
        std::vector<std::string> fields = {"fips", "date", "predicted"};
        for (int cls : classes) fields.push_back("proba_" + std::to_string(cls));
        csv::write_row(sink, fields);
        for (const auto& row : rows) {
            const auto x = detail::bundle_scaled_row(bundle, row.features, indices);
            const auto proba = bundle.model->predict_proba(x);
            std::size_t best = 0;
            for (std::size_t k = 1; k < proba.size(); ++k)
                if (proba[k] > proba[best]) best = k;
            fields = {row.fips, row.date.to_string(), std::to_string(classes[best])};
            for (double p : proba) fields.push_back(format_double(p));
            csv::write_row(sink, fields);
        }
    };

    if (out_csv.empty()) {
        write_predictions(out);
    } else {
        detail::AtomicFile file(out_csv);
        write_predictions(file.stream());
        file.commit();
        log << rows.size() << " predictions written to " << out_csv << '\n';
    }
    detail::flush_warnings(warnings, log);
}

// ---------------------------------------------------------------------------
// importance
// ---------------------------------------------------------------------------

inline std::vector<ImportanceReport> cmd_importance(const RunConfig& config,
                                                    const std::string& data_csv,
                                                    std::ostream& out, std::ostream& log) {
    config.validate();
    WarningCollector warnings;
    const auto samples = read_prepared_csv(data_csv);

    ScenarioParams params;
    params.seed = config.seed;
    params.train_fraction = config.train_fraction();
    params.collinearity_threshold = config.collinearity_threshold;
    params.forest = detail::forest_params_for(config, config.n_estimators[0]);
    params.threads = config.threads;

    auto reports = run_scenarios(samples, params, &warnings);

    std::filesystem::create_directories(config.out_dir);
    for (const auto& report : reports) {
        std::vector<std::size_t> order(report.features.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return report.importance[a] > report.importance[b];
        });
        const std::string path =
            (std::filesystem::path(config.out_dir) / ("scenario_" + report.scenario + ".csv"))
                .string();
        detail::AtomicFile file(path);
        std::vector<std::string> row = {"feature", "importance", "rank"};
        csv::write_row(file.stream(), row);
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            row = {report.features[order[rank]], format_double(report.importance[order[rank]]),
                   std::to_string(rank + 1)};
            csv::write_row(file.stream(), row);
        }
        file.commit();
    }

    const std::string summary_path =
        (std::filesystem::path(config.out_dir) / "importance_summary.csv").string();
    detail::AtomicFile summary(summary_path);
    std::vector<std::string> row = {"scenario", "n_features", "accuracy", "top3"};
    csv::write_row(summary.stream(), row);
    for (const auto& report : reports) {
        const auto top = report.top_features(3);
        std::string top_joined;
        for (const auto& name : top) top_joined += (top_joined.empty() ? "" : ";") + name;
        row = {report.scenario, std::to_string(report.features.size()),
               format_double(report.accuracy), top_joined};
        csv::write_row(summary.stream(), row);
        out << report.scenario << ": " << report.features.size() << " features, accuracy "
            << format_double(report.accuracy) << ", top3 " << top_joined << '\n';
    }
    summary.commit();

    detail::flush_warnings(warnings, log);
    log << "importance outputs written to " << config.out_dir << '\n';
    return reports;
}

// ---------------------------------------------------------------------------
// trends
// ---------------------------------------------------------------------------

inline ChangeSummary cmd_trends(const RunConfig& config, const std::string& data_csv,
                                int scenario, const std::string& label_text,
                                const std::string& out_file, const std::string& yearly_out,
                                std::ostream& out, std::ostream& log) {
    WarningCollector warnings;
    const auto samples = read_prepared_csv(data_csv);

    // Only labels and dates matter here; features pass through unscaled.
    std::vector<LabeledSample> labeled;
    labeled.reserve(samples.size());
    for (const auto& sample : samples) {
        LabeledSample row;
        row.fips = sample.fips;
        row.date = sample.date;
        row.intensity_class = discretize_score(sample.score);
        row.presence = row.intensity_class >= 1;
        labeled.push_back(std::move(row));
    }

    const int label = label_from_string(label_text);
    const auto [period_a, period_b] = scenario_periods(scenario);
    auto summary = change_summary(labeled, label, period_a, period_b, &warnings);

    std::map<std::string, std::string> names;
    if (!config.fips_path.empty())
        for (const auto& entry : parse_fips_csv(config.fips_path, &warnings))
            names.emplace(entry.fips, entry.name);

    if (!out_file.empty()) {
        const auto extension = std::filesystem::path(out_file).extension().string();
        detail::AtomicFile file(out_file);
        if (extension == ".geojson" || extension == ".json") {
            if (config.soil_path.empty())
                throw ConfigError("GeoJSON output needs --soil for county coordinates");
            const auto coords = parse_soil_coords(config.soil_path, &warnings);
            file.stream() << trends_geojson(summary.trends, coords, names, &warnings).dump(2)
                          << '\n';
        } else if (extension == ".csv") {
            write_trends_csv(file.stream(), summary.trends, names);
        } else {
            throw ConfigError("trend output must end in .geojson, .json or .csv");
        }
        file.commit();
        log << "trend data written to " << out_file << '\n';
    }

    if (!yearly_out.empty()) {
        const auto years = yearly_counts(labeled);
        detail::AtomicFile file(yearly_out);
        write_yearly_counts_csv(file.stream(), years);
        file.commit();
        log << "yearly counts written to " << yearly_out << '\n';
    }

    out << "label " << label_name(label) << " scenario " << scenario << " (" << period_a.to_string()
        << " vs " << period_b.to_string() << "): positive=" << summary.n_positive
        << " negative=" << summary.n_negative << " zero=" << summary.n_zero << '\n';
    detail::flush_warnings(warnings, log);
    return summary;
}

}  // namespace droughtcast
