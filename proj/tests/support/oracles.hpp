#pragma once

// Brute-force reference implementations used only by tests. They follow the
// same documented contracts as the library (midpoint thresholds, exact
// fraction comparison, lowest-feature/smallest-threshold tie rules) but are
// written as naive exhaustive searches, independent of the library's
// incremental sweeps.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "droughtcast/dataset.hpp"

namespace oracle {

using droughtcast::Dataset;

struct Fraction {  // num / den, den > 0
    unsigned __int128 num = 0;
    std::uint64_t den = 1;
};

inline bool fraction_greater(const Fraction& a, const Fraction& b) {
    return a.num * b.den > b.num * a.den;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
};

/// Exhaustive best split: every feature, every midpoint between consecutive
/// distinct values, child impurity recomputed from scratch per candidate.
inline std::optional<Split> exhaustive_best_split(const Dataset& data,
                                                  std::span<const std::uint32_t> rows,
                                                  std::size_t n_classes,
                                                  int min_samples_leaf = 1) {
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;

    std::vector<std::uint64_t> parent_counts(n_classes, 0);
    for (auto r : rows) parent_counts[static_cast<std::size_t>(data.labels[r])]++;
    std::uint64_t parent_sum_sq = 0;
    for (auto c : parent_counts) parent_sum_sq += c * c;

    std::optional<Split> best;
    Fraction best_score;

    for (std::size_t feature = 0; feature < data.cols; ++feature) {
        std::vector<double> values;
        for (auto r : rows) values.push_back(data.row(r)[feature]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());

        for (std::size_t v = 0; v + 1 < values.size(); ++v) {
            const double a = values[v];
            const double b = values[v + 1];
            double threshold = a + (b - a) / 2.0;
            if (threshold >= b) threshold = a;

            std::vector<std::uint64_t> left(n_classes, 0), right(n_classes, 0);
            std::size_t n_left = 0;
            for (auto r : rows) {
                const auto cls = static_cast<std::size_t>(data.labels[r]);
                if (data.row(r)[feature] <= threshold) {
                    left[cls]++;
                    ++n_left;
                } else {
                    right[cls]++;
                }
            }
            const std::size_t n_right = n - n_left;
            if (n_left < static_cast<std::size_t>(min_samples_leaf) ||
                n_right < static_cast<std::size_t>(min_samples_leaf))
                continue;

            std::uint64_t sum_sq_left = 0, sum_sq_right = 0;
            for (auto c : left) sum_sq_left += c * c;
            for (auto c : right) sum_sq_right += c * c;

            Fraction score;
            score.num = static_cast<unsigned __int128>(sum_sq_left) * n_right +
                        static_cast<unsigned __int128>(sum_sq_right) * n_left;
            score.den = static_cast<std::uint64_t>(n_left) * n_right;

            // must strictly beat the parent: num/den > parent_sum_sq/n
            if (!(score.num * n > static_cast<unsigned __int128>(parent_sum_sq) * score.den))
                continue;
            if (best && !fraction_greater(score, best_score)) continue;
            best = Split{static_cast<int>(feature), threshold};
            best_score = score;
        }
    }
    return best;
}

struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left, right;
    std::vector<std::uint64_t> class_counts;

    bool is_leaf() const { return left == nullptr; }
};

/// Exhaustive CART: all features at every node, unlimited depth,
/// min_samples_leaf = 1.
inline std::unique_ptr<TreeNode> exhaustive_tree(const Dataset& data,
                                                 std::vector<std::uint32_t> rows,
                                                 std::size_t n_classes) {
    auto node = std::make_unique<TreeNode>();
    std::vector<std::uint64_t> counts(n_classes, 0);
    for (auto r : rows) counts[static_cast<std::size_t>(data.labels[r])]++;

    std::size_t present = 0;
    for (auto c : counts)
        if (c > 0) ++present;

    std::optional<Split> split;
    if (present > 1 && rows.size() >= 2)
        split = exhaustive_best_split(data, rows, n_classes);

    if (!split) {
        node->class_counts = std::move(counts);
        return node;
    }
    std::vector<std::uint32_t> left_rows, right_rows;
    for (auto r : rows) {
        if (data.row(r)[split->feature] <= split->threshold)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }
    node->feature = split->feature;
    node->threshold = split->threshold;
    node->left = exhaustive_tree(data, std::move(left_rows), n_classes);
    node->right = exhaustive_tree(data, std::move(right_rows), n_classes);
    return node;
}

inline const TreeNode& descend(const TreeNode& node, std::span<const double> x) {
    if (node.is_leaf()) return node;
    return x[node.feature] <= node.threshold ? descend(*node.left, x) : descend(*node.right, x);
}

/// Oracle prediction: majority class of the leaf, ties to the lowest class.
inline int exhaustive_tree_predict(const TreeNode& root, std::span<const double> x) {
    const TreeNode& leaf = descend(root, x);
    std::size_t best = 0;
    for (std::size_t k = 1; k < leaf.class_counts.size(); ++k)
        if (leaf.class_counts[k] > leaf.class_counts[best]) best = k;
    return static_cast<int>(best);
}

/// All-pairs KNN: selects the k nearest by repeated minimum extraction, then
/// counts votes per class explicitly.
inline int knn_brute_force(const Dataset& train, std::span<const double> query, int k) {
    std::vector<double> distance(train.rows());
    std::vector<bool> taken(train.rows(), false);
    for (std::size_t i = 0; i < train.rows(); ++i) {
        double d2 = 0.0;
        const auto row = train.row(i);
        for (std::size_t f = 0; f < row.size(); ++f)
            d2 += (row[f] - query[f]) * (row[f] - query[f]);
        distance[i] = d2;
    }
    std::map<int, int> votes;
    for (int picked = 0; picked < k; ++picked) {
        std::size_t best = train.rows();
        for (std::size_t i = 0; i < train.rows(); ++i) {
            if (taken[i]) continue;
            if (best == train.rows() || distance[i] < distance[best]) best = i;
            // equal distances keep the earlier index
        }
        taken[best] = true;
        votes[train.labels[best]]++;
    }
    int winner = votes.begin()->first;
    for (const auto& [cls, count] : votes)
        if (count > votes.at(winner)) winner = cls;
    return winner;
}

}  // namespace oracle
