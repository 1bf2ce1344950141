#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kermit/sparse_format.hpp"
#include "kermit/telemetry.hpp"

namespace kermit {

struct ForestParams {
    std::size_t n_trees = 50;
    std::size_t max_depth = 12;
    std::size_t min_leaf = 2;
    /// 0 selects ceil(sqrt(d)).
    std::size_t features_per_split = 0;

    bool operator==(const ForestParams&) const = default;
};

struct Prediction {
    Label label = kUnknownLabel;
    double confidence = 0.0;  // fraction of trees voting for `label`
};

/// Random forest of axis-aligned CART trees grown on bootstrap samples with
/// Gini impurity. Immutable once trained.
class ForestModel {
public:
    struct Node {
        /// -1 marks a leaf.
        std::int32_t feature = -1;
        double threshold = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        /// Training samples per class, indexed like classes().
        std::vector<std::uint32_t> counts;

        bool operator==(const Node&) const = default;
    };
    using Tree = std::vector<Node>;

    /// Throws EmptyTrainingSet for fewer than 2 rows, DimensionMismatch for
    /// ragged rows.
    static ForestModel train(std::span<const LabeledInstance> data, const ForestParams& params,
                             std::uint64_t seed);

    /// Plurality vote; ties go to the smaller label. Throws DimensionMismatch.
    Prediction predict(std::span<const double> features) const;

    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<Label>& classes() const noexcept { return classes_; }
    const std::vector<Tree>& trees() const noexcept { return trees_; }
    const ForestParams& params() const noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }
    /// Accuracy of out-of-bag votes over rows left out of at least one tree.
    double oob_accuracy() const noexcept { return oob_accuracy_; }

    std::string serialize() const;
    /// Throws CorruptRecord.
    static ForestModel deserialize(std::string_view text);

    bool operator==(const ForestModel&) const = default;

private:
    std::size_t leaf_class(const Tree& tree, std::span<const double> x) const;

    std::size_t dimension_ = 0;
    std::vector<Label> classes_;
    std::vector<Tree> trees_;
    ForestParams params_;
    std::uint64_t seed_ = 0;
    double oob_accuracy_ = 0.0;
};

Prediction classify_window(const ForestModel& model, const AnalyticWindow& window);
Prediction classify_transition(const ForestModel& model, std::span<const double> flattened_deltas);

struct Evaluation {
    double accuracy = 0.0;
    /// Share of rows whose predicted class's majority true class is their own.
    double purity = 0.0;
    /// confusion[true][predicted] = count.
    std::map<Label, std::map<Label, std::size_t>> confusion;
};

Evaluation evaluate(const ForestModel& model, std::span<const LabeledInstance> labelled);

}  // namespace kermit
