#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "droughtcast/dataset.hpp"

namespace droughtcast {

/// k-nearest-neighbour vote by Euclidean distance on scaled features.
/// Distance ties resolve to the lower row index, vote ties to the lower
/// class label.
inline int knn_predict(const Dataset& train, std::span<const double> query, int k = 5) {
    if (k < 1) throw ParameterError("knn: k must be >= 1");
    if (static_cast<std::size_t>(k) > train.rows())
        throw ParameterError("knn: k exceeds the training set size");
    if (query.size() != train.cols) throw DimensionError("knn: query width mismatch");

    std::vector<std::pair<double, std::size_t>> by_distance;  // (squared distance, row)
    by_distance.reserve(train.rows());
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const auto row = train.row(i);
        double d2 = 0.0;
        for (std::size_t f = 0; f < row.size(); ++f) {
            const double diff = row[f] - query[f];
            d2 += diff * diff;
        }
        by_distance.emplace_back(d2, i);
    }
    std::partial_sort(by_distance.begin(), by_distance.begin() + k, by_distance.end());

    std::map<int, int> votes;
    for (int i = 0; i < k; ++i) votes[train.labels[by_distance[i].second]]++;
    int best_class = votes.begin()->first;
    int best_votes = votes.begin()->second;
    for (const auto& [cls, count] : votes) {
        if (count > best_votes) {  // ties keep the lower class (map is ordered)
            best_class = cls;
            best_votes = count;
        }
    }
    return best_class;
}

/// Binary logistic regression fitted by full-batch gradient descent.
struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;

    double predict_proba_positive(std::span<const double> x) const {
        if (x.size() != weights.size()) throw DimensionError("logistic: width mismatch");
        double z = bias;
        for (std::size_t f = 0; f < x.size(); ++f) z += weights[f] * x[f];
        return 1.0 / (1.0 + std::exp(-z));
    }

    int predict(std::span<const double> x) const {
        return predict_proba_positive(x) >= 0.5 ? 1 : 0;
    }
};

inline LogisticModel fit_logistic(const Dataset& data, double learning_rate = 0.5,
                                  int epochs = 500, double l2 = 0.0) {
    if (data.rows() == 0) throw ParameterError("fit_logistic: empty dataset");
    if (epochs < 1) throw ParameterError("fit_logistic: epochs must be >= 1");
    for (int label : data.labels)
        if (label != 0 && label != 1) throw TrainingError("fit_logistic: targets must be 0/1");

    LogisticModel model;
    model.weights.assign(data.cols, 0.0);
    const double n = static_cast<double>(data.rows());
    std::vector<double> gradient(data.cols);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::fill(gradient.begin(), gradient.end(), 0.0);
        double bias_gradient = 0.0;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            const auto row = data.row(i);
            const double error = model.predict_proba_positive(row) - data.labels[i];
            for (std::size_t f = 0; f < data.cols; ++f) gradient[f] += error * row[f];
            bias_gradient += error;
        }
        for (std::size_t f = 0; f < data.cols; ++f)
            model.weights[f] -= learning_rate * (gradient[f] / n + l2 * model.weights[f]);
        model.bias -= learning_rate * bias_gradient / n;
    }
    return model;
}

}  // namespace droughtcast
