#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "droughtcast/core.hpp"
#include "droughtcast/forest.hpp"
#include "droughtcast/preprocess.hpp"

namespace droughtcast {

/// A persisted model plus everything needed to apply it to new data: the
/// feature-name list (in model column order), the min/max scaler for those
/// features, and the split provenance.
struct ModelBundle {
    std::string task;  // "presence" or "intensity"
    std::vector<std::string> feature_names;
    std::vector<std::pair<double, double>> scaler;  // per feature (min, max)
    std::uint64_t seed = 0;
    double train_fraction = 0.7;
    std::shared_ptr<const Classifier> model;
};

namespace detail {

inline constexpr int kModelFormatVersion = 1;

inline void write_tree(std::ostream& out, const Tree& tree) {
    out << "tree " << tree.nodes.size() << '\n';
    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) {
            out << "L " << node.n_samples;
            for (auto c : node.class_counts) out << ' ' << c;
            out << '\n';
        } else {
            out << "I " << node.feature << ' ' << format_double(node.threshold) << ' '
                << node.left << ' ' << node.right << ' ' << node.n_samples << ' '
                << format_double(node.impurity_decrease) << '\n';
        }
    }
}

inline void write_classifier(std::ostream& out, const Classifier& model);

inline void write_forest(std::ostream& out, const ForestModel& forest) {
    out << "forest " << forest.classes().size();
    for (int c : forest.classes()) out << ' ' << c;
    const auto& params = forest.params();
    out << ' ' << params.n_estimators << ' ' << params.tree.max_features << ' '
        << params.tree.min_samples_leaf << ' '
        << (params.tree.max_depth ? *params.tree.max_depth : -1) << ' ' << forest.seed() << ' '
        << forest.n_features() << '\n';
    for (const auto& tree : forest.trees()) write_tree(out, tree);
}

inline void write_classifier(std::ostream& out, const Classifier& model) {
    if (const auto* forest = dynamic_cast<const ForestModel*>(&model)) {
        write_forest(out, *forest);
    } else if (const auto* voting = dynamic_cast<const VotingEnsemble*>(&model)) {
        out << "voting " << voting->members().size() << '\n';
        for (const auto& member : voting->members()) write_classifier(out, *member);
    } else if (const auto* ovr = dynamic_cast<const OvrModel*>(&model)) {
        out << "ovr " << ovr->classes().size();
        for (int c : ovr->classes()) out << ' ' << c;
        out << '\n';
        for (const auto& binary : ovr->binaries()) write_classifier(out, *binary);
    } else {
        throw ParameterError("cannot serialize this classifier kind");
    }
}

/// Whitespace token stream with a typed error on truncation.
class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string token;
        if (!(in_ >> token)) throw IoError("model file truncated");
        return token;
    }

    std::int64_t integer() {
        const std::string token = word();
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            throw IoError("model file: bad integer '" + token + "'");
        return value;
    }

    std::uint64_t unsigned_integer() {
        const std::string token = word();
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            throw IoError("model file: bad integer '" + token + "'");
        return value;
    }

    double real() {
        auto value = try_parse_double(word());
        if (!value) throw IoError("model file: bad number");
        return *value;
    }

    /// Integer in [1, limit]; guards size fields against corrupt files.
    std::size_t count(std::int64_t limit = 1'000'000'000) {
        const auto value = integer();
        if (value < 1 || value > limit)
            throw IoError("model file: count " + std::to_string(value) + " out of range");
        return static_cast<std::size_t>(value);
    }

    void expect(const std::string& expected) {
        const std::string token = word();
        if (token != expected)
            throw IoError("model file: expected '" + expected + "', found '" + token + "'");
    }

private:
    std::istream& in_;
};

inline Tree read_tree(TokenReader& reader, std::size_t n_classes) {
    reader.expect("tree");
    const auto n_nodes = reader.count();
    Tree tree;
    tree.nodes.resize(n_nodes);
    for (auto& node : tree.nodes) {
        const std::string kind = reader.word();
        if (kind == "L") {
            node.n_samples = reader.unsigned_integer();
            node.class_counts.resize(n_classes);
            std::uint64_t total = 0;
            for (auto& c : node.class_counts) {
                c = reader.unsigned_integer();
                total += c;
            }
            if (total == 0) throw IoError("model file: empty leaf counts");
        } else if (kind == "I") {
            node.feature = static_cast<std::int32_t>(reader.integer());
            node.threshold = reader.real();
            node.left = static_cast<std::int32_t>(reader.integer());
            node.right = static_cast<std::int32_t>(reader.integer());
            node.n_samples = reader.unsigned_integer();
            node.impurity_decrease = reader.real();
            if (node.left < 0 || node.right < 0 ||
                static_cast<std::size_t>(node.left) >= n_nodes ||
                static_cast<std::size_t>(node.right) >= n_nodes)
                throw IoError("model file: node index out of range");
        } else {
            throw IoError("model file: unknown node kind '" + kind + "'");
        }
    }
    return tree;
}

inline std::shared_ptr<const Classifier> read_classifier(TokenReader& reader);

inline std::shared_ptr<const Classifier> read_forest(TokenReader& reader) {
    const auto n_classes = reader.count(64);
    std::vector<int> classes(n_classes);
    for (auto& c : classes) c = static_cast<int>(reader.integer());
    ForestParams params;
    params.n_estimators = static_cast<int>(reader.count());
    params.tree.max_features = static_cast<int>(reader.integer());
    params.tree.min_samples_leaf = static_cast<int>(reader.integer());
    const auto depth = reader.integer();
    if (depth >= 0) params.tree.max_depth = static_cast<int>(depth);
    const std::uint64_t seed = reader.unsigned_integer();
    const auto n_features = reader.count(4096);
    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(params.n_estimators));
    for (int i = 0; i < params.n_estimators; ++i) trees.push_back(read_tree(reader, n_classes));
    return std::make_shared<ForestModel>(std::move(trees), std::move(classes), params, seed,
                                         n_features);
}

inline std::shared_ptr<const Classifier> read_classifier(TokenReader& reader) {
    const std::string kind = reader.word();
    if (kind == "forest") return read_forest(reader);
    if (kind == "voting") {
        const auto n_members = reader.count(64);
        std::vector<std::shared_ptr<const Classifier>> members;
        members.reserve(n_members);
        for (std::size_t i = 0; i < n_members; ++i) members.push_back(read_classifier(reader));
        return std::make_shared<VotingEnsemble>(std::move(members));
    }
    if (kind == "ovr") {
        const auto n_classes = reader.count(64);
        std::vector<int> classes(n_classes);
        for (auto& c : classes) c = static_cast<int>(reader.integer());
        std::vector<std::shared_ptr<const Classifier>> binaries;
        binaries.reserve(n_classes);
        for (std::size_t i = 0; i < n_classes; ++i) binaries.push_back(read_classifier(reader));
        return std::make_shared<OvrModel>(std::move(binaries), std::move(classes));
    }
    throw IoError("model file: unknown model kind '" + kind + "'");
}

}  // namespace detail

inline void save_model(std::ostream& out, const ModelBundle& bundle) {
    if (!bundle.model) throw ParameterError("save_model: empty bundle");
    out << "droughtcast-model " << detail::kModelFormatVersion << '\n';
    out << "task " << bundle.task << '\n';
    out << "features " << bundle.feature_names.size();
    for (const auto& name : bundle.feature_names) out << ' ' << name;
    out << '\n';
    out << "scaler";
    for (const auto& [lo, hi] : bundle.scaler)
        out << ' ' << format_double(lo) << ' ' << format_double(hi);
    out << '\n';
    out << "seed " << bundle.seed << '\n';
    out << "train_fraction " << format_double(bundle.train_fraction) << '\n';
    detail::write_classifier(out, *bundle.model);
}

inline void save_model(const std::string& path, const ModelBundle& bundle) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save_model(out, bundle);
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline ModelBundle load_model(std::istream& in, const std::string& path) {
    detail::TokenReader reader(in);
    reader.expect("droughtcast-model");
    const auto version = reader.integer();
    if (version != detail::kModelFormatVersion)
        throw IoError("'" + path + "': unsupported model format version " +
                      std::to_string(version));

    ModelBundle bundle;
    reader.expect("task");
    bundle.task = reader.word();
    reader.expect("features");
    const auto n_features = reader.count(4096);
    for (std::size_t i = 0; i < n_features; ++i) {
        std::string name = reader.word();
        if (!feature_index(name))
            throw SchemaError("'" + path + "': unknown feature '" + name + "' in model file");
        bundle.feature_names.push_back(std::move(name));
    }
    reader.expect("scaler");
    bundle.scaler.resize(n_features);
    for (auto& [lo, hi] : bundle.scaler) {
        lo = reader.real();
        hi = reader.real();
    }
    reader.expect("seed");
    bundle.seed = reader.unsigned_integer();
    reader.expect("train_fraction");
    bundle.train_fraction = reader.real();
    bundle.model = detail::read_classifier(reader);
    if (bundle.model->n_features() != n_features)
        throw SchemaError("'" + path + "': model width disagrees with feature list");
    return bundle;
}

inline ModelBundle load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return load_model(in, path);
}

}  // namespace droughtcast
