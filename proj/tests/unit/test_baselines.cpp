#include <catch2/catch_amalgamated.hpp>

#include "droughtcast/baselines.hpp"
#include "droughtcast/rng.hpp"
#include "support/oracles.hpp"

using namespace droughtcast;

namespace {

Dataset random_points(Rng& rng, std::size_t n, std::size_t cols, int n_classes) {
    Dataset data;
    data.cols = cols;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(cols);
        for (auto& v : x) v = rng.next_unit();
        data.add_row(x, static_cast<int>(rng.below(static_cast<std::uint64_t>(n_classes))));
    }
    return data;
}

}  // namespace

TEST_CASE("knn with k=1 returns the exact match's class") {
    Rng rng(1);
    const auto data = random_points(rng, 20, 3, 4);
    for (std::size_t i = 0; i < data.rows(); ++i)
        CHECK(knn_predict(data, data.row(i), 1) == data.labels[i]);
}

TEST_CASE("knn equals the brute-force oracle on 30-point sets") {
    Rng rng(2);
    for (int iteration = 0; iteration < 60; ++iteration) {
        const auto data = random_points(rng, 30, 2 + rng.below(3), 3);
        std::vector<double> query(data.cols);
        for (auto& v : query) v = rng.next_unit();
        for (int k : {1, 3, 5, 7})
            CHECK(knn_predict(data, query, k) == oracle::knn_brute_force(data, query, k));
    }
}

TEST_CASE("knn distance ties resolve to the lower row index") {
    Dataset data;
    data.cols = 1;
    data.add_row(std::vector<double>{1.0}, 5);   // same distance from 0
    data.add_row(std::vector<double>{-1.0}, 2);  // as this one
    CHECK(knn_predict(data, std::vector<double>{0.0}, 1) == 5);
}

TEST_CASE("knn vote ties resolve to the lower class") {
    Dataset data;
    data.cols = 1;
    data.add_row(std::vector<double>{0.0}, 4);
    data.add_row(std::vector<double>{1.0}, 4);
    data.add_row(std::vector<double>{2.0}, 1);
    data.add_row(std::vector<double>{3.0}, 1);
    CHECK(knn_predict(data, std::vector<double>{1.5}, 4) == 1);
}

TEST_CASE("knn validates parameters") {
    Rng rng(3);
    const auto data = random_points(rng, 5, 2, 2);
    const std::vector<double> query = {0.5, 0.5};
    CHECK_THROWS_AS(knn_predict(data, query, 0), ParameterError);
    CHECK_THROWS_AS(knn_predict(data, query, 6), ParameterError);
    CHECK_THROWS_AS(knn_predict(data, std::vector<double>{0.5}, 1), DimensionError);
}

TEST_CASE("logistic regression separates a linear toy set") {
    Rng rng(4);
    Dataset data;
    data.cols = 2;
    for (int i = 0; i < 200; ++i) {
        const double a = rng.next_unit();
        const double b = rng.next_unit();
        data.add_row(std::vector<double>{a, b}, a + b > 1.0 ? 1 : 0);
    }
    const auto model = fit_logistic(data, 0.8, 800, 0.0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.rows(); ++i)
        correct += model.predict(data.row(i)) == data.labels[i];
    CHECK(static_cast<double>(correct) / data.rows() >= 0.95);
}

TEST_CASE("logistic probabilities live in (0,1) and respond to l2") {
    Rng rng(5);
    Dataset data;
    data.cols = 1;
    for (int i = 0; i < 50; ++i) {
        const double x = rng.next_unit();
        data.add_row(std::vector<double>{x}, x > 0.5 ? 1 : 0);
    }
    const auto plain = fit_logistic(data, 0.5, 400, 0.0);
    const auto shrunk = fit_logistic(data, 0.5, 400, 0.5);
    CHECK(std::abs(shrunk.weights[0]) < std::abs(plain.weights[0]));
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const double p = plain.predict_proba_positive(data.row(i));
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("logistic validates its inputs") {
    Dataset data;
    data.cols = 1;
    data.add_row(std::vector<double>{0.0}, 2);
    CHECK_THROWS_AS(fit_logistic(data), TrainingError);
    CHECK_THROWS_AS(fit_logistic(Dataset{}), ParameterError);
}
