#include "kermit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "kermit/errors.hpp"

namespace kermit {

namespace {

constexpr std::string_view kMagic = "kermit-forest v1";

double gini(std::span<const std::uint32_t> counts, std::size_t total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

std::size_t argmax(std::span<const std::uint32_t> counts) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] > counts[best]) best = i;
    }
    return best;
}

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child Gini, unnormalized
    bool found = false;
};

class TreeBuilder {
public:
    TreeBuilder(std::span<const LabeledInstance> data, const std::vector<std::size_t>& class_of,
                std::size_t n_classes, const ForestParams& params, std::size_t features_per_split,
                std::mt19937_64& rng)
        : data_(data), class_of_(class_of), n_classes_(n_classes), params_(params),
          mtry_(features_per_split), rng_(rng), dim_(data.front().features.size()) {}

    ForestModel::Tree build(std::vector<std::size_t> rows) {
        tree_.clear();
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    std::uint32_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
        const auto id = static_cast<std::uint32_t>(tree_.size());
        tree_.emplace_back();
        std::vector<std::uint32_t> counts(n_classes_, 0);
        for (auto r : rows) ++counts[class_of_[r]];
        tree_[id].counts = counts;

        const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
        if (pure || depth >= params_.max_depth || rows.size() < 2 * params_.min_leaf) return id;

        const Split split = best_split(rows, counts);
        if (!split.found) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            (data_[r].features[split.feature] <= split.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        tree_[id].feature = static_cast<std::int32_t>(split.feature);
        tree_[id].threshold = split.threshold;
        const auto l = grow(left, depth + 1);
        const auto r = grow(right, depth + 1);
        tree_[id].left = l;
        tree_[id].right = r;
        return id;
    }

    Split best_split(const std::vector<std::size_t>& rows, const std::vector<std::uint32_t>& counts) {
        std::vector<std::size_t> order(dim_);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng_);

        const double parent = gini(counts, rows.size()) * static_cast<double>(rows.size());
        Split best;
        // Features past the sampled ones are tried only when none of the
        // sampled features admits a split.
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k >= mtry_ && best.found) break;
            const Split s = scan_feature(rows, counts, order[k]);
            if (s.found && (!best.found || s.impurity < best.impurity)) best = s;
        }
        if (best.found && !(best.impurity < parent - 1e-12)) best.found = false;
        return best;
    }

    Split scan_feature(const std::vector<std::size_t>& rows, const std::vector<std::uint32_t>& counts,
                       std::size_t feature) const {
        std::vector<std::pair<double, std::size_t>> values;
        values.reserve(rows.size());
        for (auto r : rows) values.emplace_back(data_[r].features[feature], class_of_[r]);
        std::sort(values.begin(), values.end());

        Split best;
        best.feature = feature;
        std::vector<std::uint32_t> left(n_classes_, 0);
        std::vector<std::uint32_t> right = counts;
        const std::size_t n = values.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left[values[i].second];
            --right[values[i].second];
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            if (values[i].first == values[i + 1].first) continue;
            if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
            const double impurity = gini(left, nl) * static_cast<double>(nl) +
                                    gini(right, nr) * static_cast<double>(nr);
            if (!best.found || impurity < best.impurity) {
                double thr = 0.5 * (values[i].first + values[i + 1].first);
                if (!(thr < values[i + 1].first)) thr = values[i].first;
                best.threshold = thr;
                best.impurity = impurity;
                best.found = true;
            }
        }
        return best;
    }

    std::span<const LabeledInstance> data_;
    const std::vector<std::size_t>& class_of_;
    std::size_t n_classes_;
    const ForestParams& params_;
    std::size_t mtry_;
    std::mt19937_64& rng_;
    std::size_t dim_;
    ForestModel::Tree tree_;
};

}  // namespace

ForestModel ForestModel::train(std::span<const LabeledInstance> data, const ForestParams& params,
                               std::uint64_t seed) {
    if (data.size() < 2) throw EmptyTrainingSet("forest training needs at least 2 rows");
    if (params.n_trees == 0) throw PreconditionError("forest needs at least one tree");
    if (params.min_leaf == 0) throw PreconditionError("min_leaf must be >= 1");
    const std::size_t dim = data.front().features.size();
    if (dim == 0) throw DimensionMismatch("training rows have no features");
    for (const auto& row : data) {
        if (row.features.size() != dim) throw DimensionMismatch("training rows differ in dimension");
    }

    ForestModel m;
    m.dimension_ = dim;
    m.params_ = params;
    m.seed_ = seed;
    for (const auto& row : data) m.classes_.push_back(row.label);
    std::sort(m.classes_.begin(), m.classes_.end());
    m.classes_.erase(std::unique(m.classes_.begin(), m.classes_.end()), m.classes_.end());

    std::vector<std::size_t> class_of(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        class_of[i] = static_cast<std::size_t>(
            std::lower_bound(m.classes_.begin(), m.classes_.end(), data[i].label) - m.classes_.begin());
    }

    const std::size_t mtry = params.features_per_split > 0
                                 ? std::min(params.features_per_split, dim)
                                 : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim))));
    std::mt19937_64 rng(seed);
    TreeBuilder builder(data, class_of, m.classes_.size(), params, mtry, rng);

    std::vector<std::vector<std::uint32_t>> oob_votes(data.size(),
                                                      std::vector<std::uint32_t>(m.classes_.size(), 0));
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        std::vector<std::size_t> rows(data.size());
        std::vector<bool> in_bag(data.size(), false);
        for (auto& r : rows) {
            r = pick(rng);
            in_bag[r] = true;
        }
        m.trees_.push_back(builder.build(std::move(rows)));
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!in_bag[i]) ++oob_votes[i][m.leaf_class(m.trees_.back(), data[i].features)];
        }
    }

    std::size_t voted = 0, correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (std::accumulate(oob_votes[i].begin(), oob_votes[i].end(), 0U) == 0) continue;
        ++voted;
        if (argmax(oob_votes[i]) == class_of[i]) ++correct;
    }
    m.oob_accuracy_ = voted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(voted);
    return m;
}

std::size_t ForestModel::leaf_class(const Tree& tree, std::span<const double> x) const {
    std::uint32_t node = 0;
    while (tree[node].feature >= 0) {
        node = x[static_cast<std::size_t>(tree[node].feature)] <= tree[node].threshold ? tree[node].left
                                                                                        : tree[node].right;
    }
    return argmax(tree[node].counts);
}

Prediction ForestModel::predict(std::span<const double> features) const {
    if (features.size() != dimension_) {
        throw DimensionMismatch("model expects " + std::to_string(dimension_) + " features, got " +
                                std::to_string(features.size()));
    }
    std::vector<std::uint32_t> votes(classes_.size(), 0);
    for (const auto& tree : trees_) ++votes[leaf_class(tree, features)];
    const std::size_t best = argmax(votes);
    return Prediction{classes_[best],
                      static_cast<double>(votes[best]) / static_cast<double>(trees_.size())};
}

std::string ForestModel::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << kMagic << '\n';
    out << "dimension " << dimension_ << '\n';
    out << "classes " << classes_.size();
    for (auto c : classes_) out << ' ' << c;
    out << '\n';
    out << "params " << params_.n_trees << ' ' << params_.max_depth << ' ' << params_.min_leaf << ' '
        << params_.features_per_split << '\n';
    out << "seed " << seed_ << '\n';
    out << "oob " << oob_accuracy_ << '\n';
    out << "trees " << trees_.size() << '\n';
    for (const auto& tree : trees_) {
        out << "tree " << tree.size() << '\n';
        for (const auto& n : tree) {
            out << n.feature << ' ' << n.threshold << ' ' << n.left << ' ' << n.right;
            for (auto c : n.counts) out << ' ' << c;
            out << '\n';
        }
    }
    return out.str();
}

ForestModel ForestModel::deserialize(std::string_view text) {
    std::istringstream in{std::string(text)};
    auto fail = [](const std::string& what) { return CorruptRecord("forest model: " + what); };
    auto expect = [&](std::string_view word) {
        std::string got;
        if (!(in >> got) || got != word) throw fail("expected '" + std::string(word) + "'");
    };
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw fail("unknown format header");

    ForestModel m;
    std::size_t n_classes = 0, n_trees = 0;
    expect("dimension");
    in >> m.dimension_;
    expect("classes");
    in >> n_classes;
    m.classes_.resize(n_classes);
    for (auto& c : m.classes_) in >> c;
    expect("params");
    in >> m.params_.n_trees >> m.params_.max_depth >> m.params_.min_leaf >> m.params_.features_per_split;
    expect("seed");
    in >> m.seed_;
    expect("oob");
    in >> m.oob_accuracy_;
    expect("trees");
    in >> n_trees;
    if (!in) throw fail("truncated header");
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::size_t n_nodes = 0;
        expect("tree");
        in >> n_nodes;
        Tree tree(n_nodes);
        for (auto& node : tree) {
            in >> node.feature >> node.threshold >> node.left >> node.right;
            node.counts.resize(n_classes);
            for (auto& c : node.counts) in >> c;
        }
        if (!in) throw fail("truncated tree");
        for (const auto& node : tree) {
            if (node.feature >= 0 &&
                (node.left >= n_nodes || node.right >= n_nodes ||
                 static_cast<std::size_t>(node.feature) >= m.dimension_)) {
                throw fail("node reference out of range");
            }
        }
        m.trees_.push_back(std::move(tree));
    }
    return m;
}

Prediction classify_window(const ForestModel& model, const AnalyticWindow& window) {
    return model.predict(window.features);
}

Prediction classify_transition(const ForestModel& model, std::span<const double> flattened_deltas) {
    return model.predict(flattened_deltas);
}

Evaluation evaluate(const ForestModel& model, std::span<const LabeledInstance> labelled) {
    if (labelled.empty()) throw PreconditionError("evaluate needs at least one row");
    Evaluation e;
    std::size_t correct = 0;
    std::map<Label, std::map<Label, std::size_t>> by_predicted;
    for (const auto& row : labelled) {
        const Label p = model.predict(row.features).label;
        ++e.confusion[row.label][p];
        ++by_predicted[p][row.label];
        if (p == row.label) ++correct;
    }
    std::size_t majority = 0;
    for (const auto& [p, truths] : by_predicted) {
        std::size_t top = 0;
        for (const auto& [t, n] : truths) top = std::max(top, n);
        majority += top;
    }
    const auto total = static_cast<double>(labelled.size());
    e.accuracy = static_cast<double>(correct) / total;
    e.purity = static_cast<double>(majority) / total;
    return e;
}

}  // namespace kermit
