#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "droughtcast/core.hpp"
#include "droughtcast/dataset.hpp"
#include "droughtcast/rng.hpp"

namespace droughtcast {

/// Gini impurity 1 - sum(p_i^2) of a class-count vector.
inline double gini(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw DomainError("gini of an empty count vector");
    double sum_sq = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct TreeParams {
    std::optional<int> max_depth;  // nullopt = unlimited
    int min_samples_leaf = 1;
    int max_features = 0;  // features sampled per node; 0 = all
};

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity_decrease = 0.0;
};

struct TreeNode {
    std::int32_t left = -1;   // node indices; -1 marks a leaf
    std::int32_t right = -1;
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint64_t n_samples = 0;
    double impurity_decrease = 0.0;           // internal nodes
    std::vector<std::uint64_t> class_counts;  // leaves

    bool is_leaf() const { return left < 0; }
};

/// CART tree stored as a preorder node array, root at index 0.
struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> x) const {
        std::size_t idx = 0;
        for (;;) {
            const TreeNode& node = nodes[idx];
            if (node.is_leaf()) return node;
            if (static_cast<std::size_t>(node.feature) >= x.size())
                throw DimensionError("feature vector narrower than the tree expects");
            idx = x[node.feature] <= node.threshold ? static_cast<std::size_t>(node.left)
                                                    : static_cast<std::size_t>(node.right);
        }
    }
};

namespace detail {

// Split selection compares candidate scores in exact integer arithmetic so
// that ties resolve identically on every platform and thread schedule.
// For fixed parent counts, maximizing the weighted Gini decrease equals
// maximizing (S_L / n_L + S_R / n_R) where S is the sum of squared child
// class counts; candidates are compared as exact fractions
// (S_L * n_R + S_R * n_L) / (n_L * n_R).
using Wide = unsigned __int128;

struct SplitScore {
    Wide num = 0;
    std::uint64_t den = 1;
};

inline bool score_greater(const SplitScore& a, const SplitScore& b) {
    return a.num * b.den > b.num * a.den;
}

/// True when the split strictly decreases impurity against the parent, i.e.
/// num / den > parent_sum_sq / n.
inline bool score_improves(const SplitScore& s, std::uint64_t parent_sum_sq, std::uint64_t n) {
    return s.num * n > Wide(parent_sum_sq) * s.den;
}

inline double impurity_decrease_value(const SplitScore& s, std::uint64_t parent_sum_sq,
                                      std::uint64_t n) {
    // gini(parent) - weighted child gini = num/(den*n) - parent_sum_sq/n^2
    const double dn = static_cast<double>(n);
    return static_cast<double>(s.num) / (static_cast<double>(s.den) * dn) -
           static_cast<double>(parent_sum_sq) / (dn * dn);
}

}  // namespace detail

/// Finds the best axis-aligned split of `rows` over `candidate_features`.
/// Thresholds sit at midpoints between consecutive distinct sorted values;
/// the winner maximizes the weighted Gini decrease, ties going to the lowest
/// feature index and then the smallest threshold. Returns nullopt when no
/// candidate strictly decreases impurity (or none satisfies
/// min_samples_leaf on both sides).
inline std::optional<SplitChoice> best_split(const Dataset& data,
                                             std::span<const std::uint32_t> rows,
                                             std::span<const std::size_t> candidate_features,
                                             std::size_t n_classes, int min_samples_leaf = 1) {
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;
    const auto min_leaf = static_cast<std::size_t>(std::max(min_samples_leaf, 1));

    std::vector<std::uint64_t> parent_counts(n_classes, 0);
    for (auto r : rows) parent_counts[static_cast<std::size_t>(data.labels[r])]++;
    std::uint64_t parent_sum_sq = 0;
    for (auto c : parent_counts) parent_sum_sq += c * c;

    std::optional<SplitChoice> best;
    detail::SplitScore best_score;

    std::vector<std::pair<double, int>> ordered;  // (value, class id)
    ordered.reserve(n);
    std::vector<std::uint64_t> left_counts(n_classes), right_counts(n_classes);

    for (std::size_t feature : candidate_features) {
        ordered.clear();
        for (auto r : rows)
            ordered.emplace_back(data.row(r)[feature], data.labels[r]);
        std::sort(ordered.begin(), ordered.end());

        std::fill(left_counts.begin(), left_counts.end(), 0);
        right_counts = parent_counts;
        std::uint64_t sum_sq_left = 0;
        std::uint64_t sum_sq_right = parent_sum_sq;

        for (std::size_t i = 1; i < n; ++i) {
            const auto cls = static_cast<std::size_t>(ordered[i - 1].second);
            sum_sq_left += 2 * left_counts[cls] + 1;
            ++left_counts[cls];
            sum_sq_right -= 2 * right_counts[cls] - 1;
            --right_counts[cls];

            if (ordered[i].first <= ordered[i - 1].first) continue;  // not a value boundary
            const std::size_t n_left = i;
            const std::size_t n_right = n - i;
            if (n_left < min_leaf || n_right < min_leaf) continue;

            detail::SplitScore score;
            score.num = detail::Wide(sum_sq_left) * n_right + detail::Wide(sum_sq_right) * n_left;
            score.den = static_cast<std::uint64_t>(n_left) * n_right;
            if (!detail::score_improves(score, parent_sum_sq, n)) continue;
            if (best && !detail::score_greater(score, best_score)) continue;

            const double a = ordered[i - 1].first;
            const double b = ordered[i].first;
            double threshold = a + (b - a) / 2.0;
            if (threshold >= b) threshold = a;  // adjacent doubles: keep left rows left

            best = SplitChoice{static_cast<int>(feature), threshold,
                               detail::impurity_decrease_value(score, parent_sum_sq, n)};
            best_score = score;
        }
    }
    return best;
}

/// Grows a CART tree on `rows` (indices into `data`, duplicates allowed, as
/// a bootstrap produces). At each node `max_features` candidate features are
/// drawn without replacement from `rng`; recursion stops on the depth limit,
/// the leaf-size limit, purity, or when no split decreases impurity.
inline Tree fit_tree(const Dataset& data, std::span<const std::uint32_t> rows,
                     const TreeParams& params, std::size_t n_classes, Rng& rng) {
    if (rows.empty()) throw ParameterError("fit_tree: no rows");
    if (params.min_samples_leaf < 1) throw ParameterError("min_samples_leaf must be >= 1");
    const std::size_t max_features =
        params.max_features <= 0 ? data.cols
                                 : std::min<std::size_t>(params.max_features, data.cols);

    Tree tree;
    std::vector<std::uint32_t> buffer(rows.begin(), rows.end());

    // Recursive preorder build over buffer[lo, hi).
    auto build = [&](auto&& self, std::size_t lo, std::size_t hi, int depth) -> std::int32_t {
        const auto node_index = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        const std::size_t n = hi - lo;
        tree.nodes[node_index].n_samples = n;

        std::vector<std::uint64_t> counts(n_classes, 0);
        for (std::size_t i = lo; i < hi; ++i)
            counts[static_cast<std::size_t>(data.labels[buffer[i]])]++;

        const bool pure = std::count_if(counts.begin(), counts.end(),
                                        [](std::uint64_t c) { return c > 0; }) <= 1;
        const bool depth_capped = params.max_depth && depth >= *params.max_depth;
        const bool too_small = n < 2 * static_cast<std::size_t>(params.min_samples_leaf) || n < 2;

        std::optional<SplitChoice> split;
        if (!pure && !depth_capped && !too_small) {
            const auto candidates = rng.sample_without_replacement(data.cols, max_features);
            split = best_split(data, std::span(buffer).subspan(lo, n), candidates, n_classes,
                               params.min_samples_leaf);
        }
        if (!split) {
            tree.nodes[node_index].class_counts = std::move(counts);
            return node_index;
        }

        const int feature = split->feature;
        const double threshold = split->threshold;
        auto mid_it = std::stable_partition(
            buffer.begin() + static_cast<std::ptrdiff_t>(lo),
            buffer.begin() + static_cast<std::ptrdiff_t>(hi),
            [&](std::uint32_t r) { return data.row(r)[feature] <= threshold; });
        const auto mid = static_cast<std::size_t>(mid_it - buffer.begin());

        tree.nodes[node_index].feature = feature;
        tree.nodes[node_index].threshold = threshold;
        tree.nodes[node_index].impurity_decrease = split->impurity_decrease;
        const std::int32_t left = self(self, lo, mid, depth + 1);
        const std::int32_t right = self(self, mid, hi, depth + 1);
        tree.nodes[node_index].left = left;
        tree.nodes[node_index].right = right;
        return node_index;
    };
    build(build, 0, buffer.size(), 0);
    return tree;
}

}  // namespace droughtcast
