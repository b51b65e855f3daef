#pragma once

#include <span>
#include <vector>

#include "droughtcast/core.hpp"

namespace droughtcast {

/// Row-major numeric matrix with one integer label per row; the common
/// currency of the learners.
struct Dataset {
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<int> labels;

    std::size_t rows() const { return labels.size(); }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values.data() + i * cols, cols);
    }

    void add_row(std::span<const double> features, int label) {
        if (cols == 0) cols = features.size();
        if (features.size() != cols) throw DimensionError("row width mismatch");
        values.insert(values.end(), features.begin(), features.end());
        labels.push_back(label);
    }
};

/// Projects labeled samples onto a feature subset; target is the presence
/// flag (0/1) or the intensity class depending on the task.
inline Dataset make_dataset(std::span<const LabeledSample> samples,
                            std::span<const std::size_t> feature_indices, bool presence_target) {
    Dataset data;
    data.cols = feature_indices.size();
    data.values.reserve(samples.size() * data.cols);
    data.labels.reserve(samples.size());
    for (const auto& sample : samples) {
        for (std::size_t f : feature_indices) data.values.push_back(sample.features.at(f));
        data.labels.push_back(presence_target ? (sample.presence ? 1 : 0) : sample.intensity_class);
    }
    return data;
}

inline std::vector<std::size_t> all_feature_indices() {
    std::vector<std::size_t> indices(kFeatureCount);
    for (std::size_t i = 0; i < kFeatureCount; ++i) indices[i] = i;
    return indices;
}

}  // namespace droughtcast
