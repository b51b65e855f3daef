#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "droughtcast/dataset.hpp"
#include "droughtcast/forest.hpp"
#include "droughtcast/metrics.hpp"
#include "droughtcast/preprocess.hpp"

namespace droughtcast {

/// Mean-decrease-impurity importance: every internal node credits
/// (node sample fraction x impurity decrease) to its split feature; per-tree
/// vectors are normalized to sum 1 and averaged across trees. Features never
/// split on get 0. A forest whose trees are all splitless stumps has no
/// importance signal and is rejected.
inline std::vector<double> mdi_importance(const ForestModel& forest) {
    const std::size_t n_features = forest.n_features();
    std::vector<double> total(n_features, 0.0);
    std::size_t informative_trees = 0;

    std::vector<double> per_tree(n_features);
    for (const auto& tree : forest.trees()) {
        std::fill(per_tree.begin(), per_tree.end(), 0.0);
        const double root_n = static_cast<double>(tree.nodes.front().n_samples);
        double sum = 0.0;
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            const double contribution =
                (static_cast<double>(node.n_samples) / root_n) * node.impurity_decrease;
            per_tree[static_cast<std::size_t>(node.feature)] += contribution;
            sum += contribution;
        }
        if (sum <= 0.0) continue;  // stump; nothing to attribute
        for (std::size_t f = 0; f < n_features; ++f) total[f] += per_tree[f] / sum;
        ++informative_trees;
    }
    if (informative_trees == 0)
        throw DomainError("mdi_importance: forest has no splits (all stumps)");
    for (auto& v : total) v /= static_cast<double>(informative_trees);
    return total;
}

namespace detail {

/// Pearson correlation matrix over the given feature columns of the raw
/// (unscaled) window samples. A zero-variance feature correlates 0 with
/// everything, with a warning.
inline std::vector<std::vector<double>> correlation_matrix(std::span<const WindowSample> samples,
                                                           std::span<const std::size_t> features,
                                                           WarningCollector* warnings) {
    const std::size_t m = features.size();
    const double n = static_cast<double>(samples.size());
    std::vector<double> mean(m, 0.0);
    for (const auto& sample : samples)
        for (std::size_t a = 0; a < m; ++a) mean[a] += sample.features[features[a]];
    for (auto& v : mean) v /= n;

    std::vector<std::vector<double>> cov(m, std::vector<double>(m, 0.0));
    for (const auto& sample : samples) {
        for (std::size_t a = 0; a < m; ++a) {
            const double da = sample.features[features[a]] - mean[a];
            for (std::size_t b = a; b < m; ++b)
                cov[a][b] += da * (sample.features[features[b]] - mean[b]);
        }
    }
    std::vector<std::vector<double>> corr(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a) {
        if (cov[a][a] <= 0.0)
            warn(warnings, "zero-variance feature " + std::string(kFeatureNames[features[a]]) +
                               "; correlations taken as 0");
        corr[a][a] = 1.0;
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double denom = std::sqrt(cov[a][a]) * std::sqrt(cov[b][b]);
            const double r = denom > 0.0 ? cov[a][b] / denom : 0.0;
            corr[a][b] = corr[b][a] = r;
        }
    }
    return corr;
}

}  // namespace detail

/// Drops features until no retained pair has |r| above the threshold.
/// The pair with the largest |r| is handled first; within a pair the feature
/// with the higher mean |r| against the other retained features is dropped
/// (ties: the higher index). Returns the retained canonical indices,
/// ascending.
inline std::vector<std::size_t> collinearity_prune(std::span<const WindowSample> samples,
                                                   double threshold = 0.9,
                                                   WarningCollector* warnings = nullptr) {
    if (samples.size() < 2) throw ParameterError("collinearity_prune: need >= 2 samples");
    std::vector<std::size_t> retained = all_feature_indices();

    for (;;) {
        const auto corr = detail::correlation_matrix(samples, retained, warnings);
        warnings = nullptr;  // zero-variance warning once, not per pass
        const std::size_t m = retained.size();
        std::size_t worst_a = 0, worst_b = 0;
        double worst = threshold;
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                if (std::abs(corr[a][b]) > worst) {
                    worst = std::abs(corr[a][b]);
                    worst_a = a;
                    worst_b = b;
                }
            }
        }
        if (worst_a == worst_b) break;  // no pair above threshold

        auto mean_abs = [&](std::size_t idx) {
            double sum = 0.0;
            for (std::size_t other = 0; other < m; ++other)
                if (other != idx) sum += std::abs(corr[idx][other]);
            return sum / static_cast<double>(m - 1);
        };
        const double mean_a = mean_abs(worst_a);
        const double mean_b = mean_abs(worst_b);
        const std::size_t drop = mean_a > mean_b ? worst_a : worst_b;  // tie: b has higher index
        retained.erase(retained.begin() + static_cast<std::ptrdiff_t>(drop));
        if (retained.size() < 2) break;
    }
    return retained;
}

/// Keeps one representative per measurement family: the _MIN/_MAX/_RANGE
/// variants go, the base series stay.
inline std::vector<std::size_t> family_prune() {
    std::vector<std::size_t> retained;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const std::string_view name = kFeatureNames[f];
        if (name.ends_with("_MIN") || name.ends_with("_MAX") || name.ends_with("_RANGE")) continue;
        retained.push_back(f);
    }
    return retained;
}

/// One feature-selection scenario: the retained features, the accuracy of a
/// presence forest retrained on them, and its MDI ranking.
struct ImportanceReport {
    std::string scenario;
    std::vector<std::string> features;   // retained names, model column order
    std::vector<double> importance;      // aligned with features, sums to 1
    double accuracy = 0.0;

    std::vector<std::string> top_features(std::size_t count) const {
        std::vector<std::size_t> order(features.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
        std::vector<std::string> top;
        for (std::size_t i = 0; i < std::min(count, order.size()); ++i)
            top.push_back(features[order[i]]);
        return top;
    }
};

struct ScenarioParams {
    std::uint64_t seed = 20;
    double train_fraction = 0.7;
    double collinearity_threshold = 0.9;
    ForestParams forest;  // variant-1 hyperparameters
    int threads = 1;
};

namespace detail {

inline ImportanceReport run_one_scenario(std::string name,
                                         std::span<const LabeledSample> labeled,
                                         std::span<const std::size_t> retained,
                                         const ScenarioParams& params) {
    const auto split = split_train_test(labeled, params.seed, params.train_fraction);
    const Dataset train = make_dataset(split.train, retained, /*presence_target=*/true);
    const Dataset test = make_dataset(split.test, retained, /*presence_target=*/true);

    // Same derivation as the training pipeline's first variant, so the full
    // scenario reproduces the presence RandomForest 1 run.
    const std::uint64_t forest_seed = derive_seed(params.seed, kPurposeVariant, 0);
    const ForestModel forest = fit_forest(train, params.forest, forest_seed, params.threads);

    std::vector<int> truth(test.rows());
    std::vector<int> pred(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
        truth[i] = test.labels[i];
        pred[i] = predict_class(forest, test.row(i));
    }
    const auto report = class_report(truth, pred, forest.classes());

    ImportanceReport out;
    out.scenario = std::move(name);
    for (std::size_t f : retained) out.features.emplace_back(kFeatureNames[f]);
    out.importance = mdi_importance(forest);
    out.accuracy = report.accuracy;
    return out;
}

}  // namespace detail

/// The three feature-set scenarios, each retraining a presence forest with
/// the variant-1 hyperparameters: full features, collinearity-pruned, and
/// family-pruned. Scenario runs share the seed derivations of the training
/// pipeline, so the full scenario reproduces the presence variant-1 model.
inline std::vector<ImportanceReport> run_scenarios(std::span<const WindowSample> samples,
                                                   const ScenarioParams& params,
                                                   WarningCollector* warnings = nullptr) {
    const ScalerParams scaler = fit_scaler(samples);
    const auto labeled = label_samples(samples, scaler);

    const auto full = all_feature_indices();
    const auto pruned = collinearity_prune(samples, params.collinearity_threshold, warnings);
    const auto family = family_prune();

    std::vector<ImportanceReport> reports;
    reports.push_back(detail::run_one_scenario("full", labeled, full, params));
    reports.push_back(detail::run_one_scenario("collinearity_pruned", labeled, pruned, params));
    reports.push_back(detail::run_one_scenario("family_pruned", labeled, family, params));
    return reports;
}

}  // namespace droughtcast
