#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "droughtcast/core.hpp"
#include "droughtcast/rng.hpp"

namespace droughtcast {

/// Maps a continuous PDSI-derived score in [0,5] to an intensity class,
/// rounding half up: 0 = no drought, k in 1..5 = D(k-1).
inline int discretize_score(double score) {
    if (!std::isfinite(score) || score < 0.0 || score > 5.0)
        throw DomainError("score outside [0,5]: " + format_double(score));
    return static_cast<int>(std::floor(score + 0.5));
}

/// Per-feature min/max fitted over a sample set.
struct ScalerParams {
    FeatureVector min{};
    FeatureVector max{};
};

inline ScalerParams fit_scaler(std::span<const WindowSample> samples) {
    if (samples.empty()) throw ParameterError("fit_scaler: empty input");
    ScalerParams params;
    params.min = samples.front().features;
    params.max = samples.front().features;
    for (const auto& sample : samples) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            params.min[f] = std::min(params.min[f], sample.features[f]);
            params.max[f] = std::max(params.max[f], sample.features[f]);
        }
    }
    return params;
}

/// x' = (x - min) / (max - min), clamped to [0,1]; a degenerate feature
/// (max == min) maps to 0.
inline FeatureVector apply_scaler(const ScalerParams& params, const FeatureVector& features) {
    FeatureVector scaled{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double range = params.max[f] - params.min[f];
        if (range <= 0.0) {
            scaled[f] = 0.0;
        } else {
            scaled[f] = std::clamp((features[f] - params.min[f]) / range, 0.0, 1.0);
        }
    }
    return scaled;
}

/// Scales and labels every window sample.
inline std::vector<LabeledSample> label_samples(std::span<const WindowSample> samples,
                                                const ScalerParams& params) {
    std::vector<LabeledSample> labeled;
    labeled.reserve(samples.size());
    for (const auto& sample : samples) {
        LabeledSample row;
        row.fips = sample.fips;
        row.date = sample.date;
        row.features = apply_scaler(params, sample.features);
        row.intensity_class = discretize_score(sample.score);
        row.presence = row.intensity_class >= 1;
        labeled.push_back(std::move(row));
    }
    return labeled;
}

/// The seed-driven permutation behind the train/test split; stream
/// derive_seed(seed, kPurposeSplitShuffle, 0).
inline std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, kPurposeSplitShuffle, 0));
    rng.shuffle(order);
    return order;
}

inline std::size_t train_count_for(std::size_t n, double train_fraction) {
    return static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n)));
}

/// Seed-driven uniform shuffle, then the first ceil(train_fraction * n)
/// samples form the train side.
struct SplitResult {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
};

inline SplitResult split_train_test(std::span<const LabeledSample> samples, std::uint64_t seed,
                                    double train_fraction = 0.7) {
    if (samples.size() < 10) throw ParameterError("split needs at least 10 samples");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ParameterError("train_fraction must lie in (0,1)");

    const auto order = shuffled_order(samples.size(), seed);
    const std::size_t train_count = train_count_for(samples.size(), train_fraction);
    SplitResult result;
    result.train.reserve(train_count);
    result.test.reserve(samples.size() - train_count);
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < train_count ? result.train : result.test).push_back(samples[order[i]]);
    return result;
}

/// Presence task: every row, binary target via LabeledSample::presence.
inline std::vector<LabeledSample> presence_subset(std::span<const LabeledSample> samples) {
    return std::vector<LabeledSample>(samples.begin(), samples.end());
}

/// Intensity task: only drought rows (class 1..5), target = intensity_class.
inline std::vector<LabeledSample> intensity_subset(std::span<const LabeledSample> samples) {
    std::vector<LabeledSample> subset;
    for (const auto& sample : samples)
        if (sample.intensity_class >= 1) subset.push_back(sample);
    return subset;
}

}  // namespace droughtcast
