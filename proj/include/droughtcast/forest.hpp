#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "droughtcast/dataset.hpp"
#include "droughtcast/rng.hpp"
#include "droughtcast/tree.hpp"

namespace droughtcast {

/// A trained probability-producing model over an ordered class list.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual const std::vector<int>& classes() const = 0;
    virtual std::size_t n_features() const = 0;

    /// Probability vector aligned with classes(); non-negative, sums to 1.
    virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;
};

/// Argmax of predict_proba; ties go to the lowest class index.
inline int predict_class(const Classifier& model, std::span<const double> x) {
    const auto proba = model.predict_proba(x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < proba.size(); ++i)
        if (proba[i] > proba[best]) best = i;
    return model.classes()[best];
}

struct ForestParams {
    int n_estimators = 100;
    TreeParams tree;
};

/// Bagged CART forest; a prediction is the unweighted mean of the trees'
/// leaf-count distributions.
class ForestModel final : public Classifier {
public:
    ForestModel(std::vector<Tree> trees, std::vector<int> classes, ForestParams params,
                std::uint64_t seed, std::size_t n_features)
        : trees_(std::move(trees)),
          classes_(std::move(classes)),
          params_(params),
          seed_(seed),
          n_features_(n_features) {}

    const std::vector<int>& classes() const override { return classes_; }
    std::size_t n_features() const override { return n_features_; }
    const std::vector<Tree>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    std::vector<double> predict_proba(std::span<const double> x) const override {
        if (x.size() != n_features_)
            throw DimensionError("expected " + std::to_string(n_features_) + " features, got " +
                                 std::to_string(x.size()));
        std::vector<double> proba(classes_.size(), 0.0);
        for (const auto& tree : trees_) {
            const auto& leaf = tree.leaf_for(x);
            std::uint64_t total = 0;
            for (auto c : leaf.class_counts) total += c;
            for (std::size_t k = 0; k < proba.size(); ++k)
                proba[k] += static_cast<double>(leaf.class_counts[k]) / static_cast<double>(total);
        }
        for (auto& p : proba) p /= static_cast<double>(trees_.size());
        return proba;
    }

private:
    std::vector<Tree> trees_;
    std::vector<int> classes_;
    ForestParams params_;
    std::uint64_t seed_;
    std::size_t n_features_;
};

/// Trains `n_estimators` trees, each on a bootstrap sample (n draws with
/// replacement). Tree i owns the stream derive_seed(seed, kPurposeTree, i),
/// which first yields its bootstrap and then its per-node feature draws, so
/// serial and parallel training produce identical forests.
inline ForestModel fit_forest(const Dataset& data, const ForestParams& params, std::uint64_t seed,
                              int threads = 1) {
    if (params.n_estimators < 1) throw ParameterError("n_estimators must be >= 1");
    if (data.rows() == 0) throw ParameterError("fit_forest: empty dataset");

    std::vector<int> classes(data.labels.begin(), data.labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    Dataset indexed;
    indexed.cols = data.cols;
    indexed.values = data.values;
    indexed.labels.reserve(data.rows());
    for (int label : data.labels) {
        const auto it = std::lower_bound(classes.begin(), classes.end(), label);
        indexed.labels.push_back(static_cast<int>(it - classes.begin()));
    }

    const std::size_t n = indexed.rows();
    std::vector<Tree> trees(static_cast<std::size_t>(params.n_estimators));
    parallel_for(trees.size(), threads, [&](std::size_t i) {
        Rng rng(derive_seed(seed, kPurposeTree, i));
        std::vector<std::uint32_t> bootstrap(n);
        for (auto& r : bootstrap) r = static_cast<std::uint32_t>(rng.below(n));
        trees[i] = fit_tree(indexed, bootstrap, params.tree, classes.size(), rng);
    });
    return ForestModel(std::move(trees), std::move(classes), params, seed, data.cols);
}

/// Soft-voting ensemble: the unweighted mean of its members' probability
/// vectors. Members must share one class list.
class VotingEnsemble final : public Classifier {
public:
    explicit VotingEnsemble(std::vector<std::shared_ptr<const Classifier>> members)
        : members_(std::move(members)) {
        if (members_.size() < 2) throw ParameterError("voting ensemble needs >= 2 members");
        for (const auto& member : members_) {
            if (member->classes() != members_.front()->classes())
                throw ParameterError("voting ensemble members disagree on classes");
            if (member->n_features() != members_.front()->n_features())
                throw DimensionError("voting ensemble members disagree on feature width");
        }
    }

    const std::vector<int>& classes() const override { return members_.front()->classes(); }
    std::size_t n_features() const override { return members_.front()->n_features(); }
    const std::vector<std::shared_ptr<const Classifier>>& members() const { return members_; }

    std::vector<double> predict_proba(std::span<const double> x) const override {
        std::vector<double> proba(classes().size(), 0.0);
        for (const auto& member : members_) {
            const auto member_proba = member->predict_proba(x);
            for (std::size_t k = 0; k < proba.size(); ++k) proba[k] += member_proba[k];
        }
        for (auto& p : proba) p /= static_cast<double>(members_.size());
        return proba;
    }

private:
    std::vector<std::shared_ptr<const Classifier>> members_;
};

/// OneVsRest reduction: one binary model per class; prediction renormalizes
/// the per-class positive probabilities (uniform when they are all zero).
class OvrModel final : public Classifier {
public:
    OvrModel(std::vector<std::shared_ptr<const Classifier>> binaries, std::vector<int> classes)
        : binaries_(std::move(binaries)), classes_(std::move(classes)) {
        if (binaries_.empty() || binaries_.size() != classes_.size())
            throw ParameterError("OneVsRest needs one binary model per class");
    }

    const std::vector<int>& classes() const override { return classes_; }
    std::size_t n_features() const override { return binaries_.front()->n_features(); }
    const std::vector<std::shared_ptr<const Classifier>>& binaries() const { return binaries_; }

    std::vector<double> predict_proba(std::span<const double> x) const override {
        std::vector<double> proba(classes_.size(), 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < classes_.size(); ++k) {
            const auto binary_proba = binaries_[k]->predict_proba(x);
            const auto& binary_classes = binaries_[k]->classes();
            // positive probability = P(label 1) in the binary model
            double positive = 0.0;
            for (std::size_t j = 0; j < binary_classes.size(); ++j)
                if (binary_classes[j] == 1) positive = binary_proba[j];
            proba[k] = positive;
            total += positive;
        }
        if (total <= 0.0) {
            std::fill(proba.begin(), proba.end(), 1.0 / static_cast<double>(proba.size()));
        } else {
            for (auto& p : proba) p /= total;
        }
        return proba;
    }

private:
    std::vector<std::shared_ptr<const Classifier>> binaries_;
    std::vector<int> classes_;
};

/// Factory for the binary base model of one OneVsRest class: receives the
/// rows with targets remapped to {0,1} and a derived seed.
using BinaryFactory =
    std::function<std::shared_ptr<const Classifier>(const Dataset&, std::uint64_t seed)>;

/// Fits one binary model per class (class k vs rest), class k seeded with
/// derive_seed(seed, kPurposeOvrClass, k). When `expected_classes` is given,
/// a listed class with no rows is a training error; otherwise the class list
/// is taken from the data.
inline OvrModel fit_ovr(const Dataset& data, const BinaryFactory& factory, std::uint64_t seed,
                        std::vector<int> expected_classes = {}) {
    std::vector<int> classes = std::move(expected_classes);
    if (classes.empty()) {
        classes.assign(data.labels.begin(), data.labels.end());
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    }
    if (classes.size() < 2) throw TrainingError("OneVsRest needs at least 2 classes present");

    std::vector<std::shared_ptr<const Classifier>> binaries(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k) {
        Dataset binary;
        binary.cols = data.cols;
        binary.values = data.values;
        binary.labels.reserve(data.rows());
        std::size_t positives = 0;
        for (int label : data.labels) {
            const int target = label == classes[k] ? 1 : 0;
            positives += static_cast<std::size_t>(target);
            binary.labels.push_back(target);
        }
        if (positives == 0)
            throw TrainingError("OneVsRest: no rows for class " + std::to_string(classes[k]));
        binaries[k] = factory(binary, derive_seed(seed, kPurposeOvrClass, k));
    }
    return OvrModel(std::move(binaries), std::move(classes));
}

}  // namespace droughtcast
