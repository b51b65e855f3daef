#include <catch2/catch_amalgamated.hpp>

#include "droughtcast/tree.hpp"
#include "support/oracles.hpp"

using namespace droughtcast;

namespace {

Dataset grid_dataset(std::span<const std::pair<std::vector<double>, int>> rows) {
    Dataset data;
    for (const auto& [x, y] : rows) data.add_row(x, y);
    return data;
}

std::vector<std::uint32_t> all_rows(const Dataset& data) {
    std::vector<std::uint32_t> rows(data.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
    return rows;
}

/// Random instance on a coarse value grid (quarters), <= 60 rows,
/// <= 3 features, <= 3 classes.
Dataset random_instance(Rng& rng) {
    Dataset data;
    const std::size_t n_rows = 2 + rng.below(59);
    const std::size_t n_cols = 1 + rng.below(3);
    const int n_classes = 2 + static_cast<int>(rng.below(2));
    data.cols = n_cols;
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::vector<double> x(n_cols);
        for (auto& v : x) v = 0.25 * static_cast<double>(rng.below(17));  // 0 .. 4 in quarters
        data.add_row(x, static_cast<int>(rng.below(static_cast<std::uint64_t>(n_classes))));
    }
    return data;
}

bool trees_identical(const Tree& actual, const oracle::TreeNode& expected) {
    // walk both in lockstep, comparing structure exactly
    std::vector<std::pair<std::size_t, const oracle::TreeNode*>> stack = {{0, &expected}};
    while (!stack.empty()) {
        auto [index, node] = stack.back();
        stack.pop_back();
        const TreeNode& mine = actual.nodes[index];
        if (mine.is_leaf() != node->is_leaf()) return false;
        if (mine.is_leaf()) {
            if (mine.class_counts != node->class_counts) return false;
            continue;
        }
        if (mine.feature != node->feature) return false;
        if (mine.threshold != node->threshold) return false;
        stack.push_back({static_cast<std::size_t>(mine.left), node->left.get()});
        stack.push_back({static_cast<std::size_t>(mine.right), node->right.get()});
    }
    return true;
}

}  // namespace

TEST_CASE("gini matches hand values") {
    CHECK(gini(std::vector<std::uint64_t>{5, 0}) == 0.0);
    CHECK(gini(std::vector<std::uint64_t>{2, 2}) == 0.5);
    CHECK(gini(std::vector<std::uint64_t>{1, 1, 1, 1, 1}) == Catch::Approx(0.8));
    CHECK(gini(std::vector<std::uint64_t>{3}) == 0.0);
    CHECK_THROWS_AS(gini(std::vector<std::uint64_t>{0, 0}), DomainError);
}

TEST_CASE("best_split finds the single possible split") {
    const std::vector<std::pair<std::vector<double>, int>> rows = {{{0.0}, 0}, {{1.0}, 1}};
    const auto data = grid_dataset(rows);
    const std::size_t features[] = {0};
    const auto split = best_split(data, all_rows(data), features, 2);
    REQUIRE(split.has_value());
    CHECK(split->feature == 0);
    CHECK(split->threshold == 0.5);
    CHECK(split->impurity_decrease == Catch::Approx(0.5));
}

TEST_CASE("identical feature rows admit no split") {
    const std::vector<std::pair<std::vector<double>, int>> rows = {
        {{1.0, 2.0}, 0}, {{1.0, 2.0}, 1}, {{1.0, 2.0}, 0}};
    const auto data = grid_dataset(rows);
    const std::size_t features[] = {0, 1};
    CHECK_FALSE(best_split(data, all_rows(data), features, 2).has_value());
}

TEST_CASE("no-improvement splits are rejected") {
    // alternating classes: any single threshold keeps both sides mixed 50/50
    const std::vector<std::pair<std::vector<double>, int>> rows = {
        {{0.0}, 0}, {{1.0}, 1}, {{2.0}, 0}, {{3.0}, 1}};
    const auto data = grid_dataset(rows);
    const std::size_t features[] = {0};
    const auto split = best_split(data, all_rows(data), features, 2);
    // the middle split (1.5) gives zero decrease; 0.5 and 2.5 give a positive one
    REQUIRE(split.has_value());
    CHECK(split->threshold == 0.5);  // tie between 0.5 and 2.5 -> smallest
}

TEST_CASE("best_split equals the exhaustive oracle on random instances") {
    Rng rng(2024);
    for (int iteration = 0; iteration < 300; ++iteration) {
        const auto data = random_instance(rng);
        std::vector<std::size_t> features(data.cols);
        for (std::size_t f = 0; f < data.cols; ++f) features[f] = f;
        std::size_t n_classes = 3;

        const auto mine = best_split(data, all_rows(data), features, n_classes);
        const auto expected = oracle::exhaustive_best_split(data, all_rows(data), n_classes);
        REQUIRE(mine.has_value() == expected.has_value());
        if (mine) {
            CHECK(mine->feature == expected->feature);
            CHECK(mine->threshold == expected->threshold);
        }
    }
}

TEST_CASE("min_samples_leaf constrains candidate thresholds") {
    const std::vector<std::pair<std::vector<double>, int>> rows = {
        {{0.0}, 0}, {{1.0}, 0}, {{2.0}, 0}, {{3.0}, 1}};
    const auto data = grid_dataset(rows);
    const std::size_t features[] = {0};
    const auto unconstrained = best_split(data, all_rows(data), features, 2, 1);
    REQUIRE(unconstrained.has_value());
    CHECK(unconstrained->threshold == 2.5);
    const auto constrained = best_split(data, all_rows(data), features, 2, 2);
    REQUIRE(constrained.has_value());
    CHECK(constrained->threshold == 1.5);  // 2.5 would leave one row on the right
}

TEST_CASE("fit_tree separates separable data at depth 1") {
    const std::vector<std::pair<std::vector<double>, int>> rows = {
        {{0.0}, 0}, {{0.25}, 0}, {{1.0}, 1}, {{1.25}, 1}};
    const auto data = grid_dataset(rows);
    Rng rng(1);
    const auto tree = fit_tree(data, all_rows(data), TreeParams{}, 2, rng);
    REQUIRE(tree.nodes.size() == 3);
    CHECK_FALSE(tree.nodes[0].is_leaf());
    CHECK(tree.nodes[tree.nodes[0].left].is_leaf());
    CHECK(tree.nodes[tree.nodes[0].right].is_leaf());
    CHECK(tree.nodes[tree.nodes[0].left].class_counts == std::vector<std::uint64_t>{2, 0});
    CHECK(tree.nodes[tree.nodes[0].right].class_counts == std::vector<std::uint64_t>{0, 2});
}

TEST_CASE("max_depth 0 yields a single leaf with full counts") {
    const std::vector<std::pair<std::vector<double>, int>> rows = {
        {{0.0}, 0}, {{1.0}, 1}, {{2.0}, 1}};
    const auto data = grid_dataset(rows);
    TreeParams params;
    params.max_depth = 0;
    Rng rng(1);
    const auto tree = fit_tree(data, all_rows(data), params, 2, rng);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].class_counts == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("fit_tree is deterministic for a fixed stream") {
    Rng data_rng(77);
    const auto data = random_instance(data_rng);
    TreeParams params;
    params.max_features = 1;  // forces real feature sampling
    Rng rng_a(42), rng_b(42);
    const auto tree_a = fit_tree(data, all_rows(data), params, 3, rng_a);
    const auto tree_b = fit_tree(data, all_rows(data), params, 3, rng_b);
    REQUIRE(tree_a.nodes.size() == tree_b.nodes.size());
    for (std::size_t i = 0; i < tree_a.nodes.size(); ++i) {
        CHECK(tree_a.nodes[i].feature == tree_b.nodes[i].feature);
        CHECK(tree_a.nodes[i].threshold == tree_b.nodes[i].threshold);
        CHECK(tree_a.nodes[i].class_counts == tree_b.nodes[i].class_counts);
    }
}

TEST_CASE("unlimited tree memorizes consistent training data") {
    Rng rng(55);
    for (int iteration = 0; iteration < 10; ++iteration) {
        auto data = random_instance(rng);
        // force label consistency: identical feature vectors get one label
        for (std::size_t i = 0; i < data.rows(); ++i)
            for (std::size_t j = i + 1; j < data.rows(); ++j) {
                bool same = true;
                for (std::size_t f = 0; f < data.cols; ++f)
                    same = same && data.row(i)[f] == data.row(j)[f];
                if (same) data.labels[j] = data.labels[i];
            }
        Rng tree_rng(9);
        const auto tree = fit_tree(data, all_rows(data), TreeParams{}, 3, tree_rng);
        for (std::size_t i = 0; i < data.rows(); ++i) {
            const auto& leaf = tree.leaf_for(data.row(i));
            std::size_t arg = 0;
            for (std::size_t k = 1; k < leaf.class_counts.size(); ++k)
                if (leaf.class_counts[k] > leaf.class_counts[arg]) arg = k;
            CHECK(static_cast<int>(arg) == data.labels[i]);
        }
    }
}

TEST_CASE("fit_tree equals the exhaustive oracle node-for-node") {
    Rng rng(4242);
    int compared = 0;
    for (int iteration = 0; iteration < 200; ++iteration) {
        const auto data = random_instance(rng);
        Rng tree_rng(derive_seed(1, kPurposeTree, static_cast<std::uint64_t>(iteration)));
        const auto mine = fit_tree(data, all_rows(data), TreeParams{}, 3, tree_rng);
        const auto expected =
            oracle::exhaustive_tree(data, all_rows(data), 3);
        REQUIRE(trees_identical(mine, *expected));
        ++compared;
    }
    CHECK(compared == 200);
}
