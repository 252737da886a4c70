#include "stylerank/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stylerank/rng.hpp"

namespace stylerank {

namespace {

constexpr double kGainTolerance = 1e-12;

double entropy(double m0, double m1) {
    const double total = m0 + m1;
    if (total <= 0.0) {
        return 0.0;
    }
    double h = 0.0;
    for (double m : {m0, m1}) {
        if (m > 0.0) {
            const double p = m / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(std::span<const std::vector<double>> rows, std::span<const int> labels, const double (&class_weight)[2],
                const ForestConfig& config, std::size_t dimension, std::uint64_t seed)
        : rows_(rows), labels_(labels), config_(config), dimension_(dimension),
          fps_(resolved_features_per_split(config, dimension)), rng_(seed), order_(dimension) {
        weight_[0] = class_weight[0];
        weight_[1] = class_weight[1];
        std::iota(order_.begin(), order_.end(), std::size_t{0});
    }

    void grow(DecisionTree& tree, std::vector<int>& training_leaves) {
        const std::size_t n = rows_.size();
        count_.assign(n, 0);
        if (config_.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                ++count_[rng_.index(n)];
            }
        } else {
            std::fill(count_.begin(), count_.end(), 1);
        }
        std::vector<std::size_t> samples;
        for (std::size_t i = 0; i < n; ++i) {
            if (count_[i] > 0) {
                samples.push_back(i);
            }
        }
        training_leaves.assign(n, -1);
        tree_ = &tree;
        leaves_ = &training_leaves;
        build(samples, 0);
    }

private:
    double mass(std::size_t i) const { return count_[i] * weight_[labels_[i]]; }

    int build(const std::vector<std::size_t>& samples, int depth) {
        TreeNode node;
        node.depth = depth;
        long multiplicity = 0;
        for (std::size_t i : samples) {
            node.class_mass[labels_[i]] += mass(i);
            multiplicity += count_[i];
        }
        const int index = static_cast<int>(tree_->nodes.size());
        tree_->nodes.push_back(node);

        const bool pure = node.class_mass[0] <= 0.0 || node.class_mass[1] <= 0.0;
        Split split;
        if (depth < config_.max_depth && !pure && multiplicity >= static_cast<long>(config_.min_samples_split)) {
            split = best_split(samples, node.class_mass[0], node.class_mass[1]);
        }
        if (split.feature < 0) {
            const int leaf = tree_->leaf_count++;
            tree_->nodes[index].leaf_id = leaf;
            for (std::size_t i : samples) {
                (*leaves_)[i] = leaf;
            }
            return index;
        }

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t i : samples) {
            (rows_[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(i);
        }
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        TreeNode& self = tree_->nodes[index];
        self.feature = split.feature;
        self.threshold = split.threshold;
        self.left = l;
        self.right = r;
        return index;
    }

    Split best_split(const std::vector<std::size_t>& samples, double m0, double m1) {
        const double total = m0 + m1;
        const double parent = entropy(m0, m1);
        Split best;
        std::size_t informative = 0;
        for (std::size_t k = 0; k < dimension_ && informative < fps_; ++k) {
            std::swap(order_[k], order_[k + rng_.index(dimension_ - k)]);
            const std::size_t f = order_[k];

            values_.clear();
            double lo = rows_[samples.front()][f];
            double hi = lo;
            for (std::size_t i : samples) {
                const double v = rows_[i][f];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                values_.emplace_back(v, i);
            }
            if (lo == hi) {
                continue;
            }
            ++informative;
            std::sort(values_.begin(), values_.end());

            double left[2] = {0.0, 0.0};
            for (std::size_t k2 = 0; k2 + 1 < values_.size(); ++k2) {
                const std::size_t i = values_[k2].second;
                left[labels_[i]] += mass(i);
                const double a = values_[k2].first;
                const double b = values_[k2 + 1].first;
                if (a == b) {
                    continue;
                }
                const double wl = left[0] + left[1];
                const double wr = total - wl;
                const double gain = parent - (wl / total) * entropy(left[0], left[1]) -
                                    (wr / total) * entropy(m0 - left[0], m1 - left[1]);
                double threshold = a + (b - a) / 2.0;
                if (threshold >= b) {
                    threshold = a;
                }
                const int fi = static_cast<int>(f);
                const bool better =
                    best.feature < 0 || gain > best.gain + kGainTolerance ||
                    (gain >= best.gain - kGainTolerance &&
                     (fi < best.feature || (fi == best.feature && threshold < best.threshold)));
                if (better) {
                    best = {fi, threshold, gain};
                }
            }
        }
        return best;
    }

    std::span<const std::vector<double>> rows_;
    std::span<const int> labels_;
    const ForestConfig& config_;
    std::size_t dimension_;
    std::size_t fps_;
    Rng rng_;
    double weight_[2] = {1.0, 1.0};
    std::vector<std::size_t> order_;
    std::vector<int> count_;
    std::vector<std::pair<double, std::size_t>> values_;
    DecisionTree* tree_ = nullptr;
    std::vector<int>* leaves_ = nullptr;
};

struct FitSetup {
    std::size_t dimension = 0;
    double class_weight[2] = {1.0, 1.0};
};

FitSetup validate(std::span<const std::vector<double>> rows, std::span<const int> labels, const ForestConfig& config) {
    if (rows.size() != labels.size()) {
        throw DomainError("one label per row required");
    }
    if (config.tree_count == 0 || config.max_depth < 1) {
        throw DomainError("tree count and max depth must be positive");
    }
    FitSetup setup;
    setup.dimension = rows.empty() ? 0 : rows.front().size();
    std::size_t per_class[2] = {0, 0};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != setup.dimension) {
            throw DomainError("rows of unequal dimension");
        }
        if (labels[i] != 0 && labels[i] != 1) {
            throw DomainError("labels must be 0 or 1");
        }
        ++per_class[labels[i]];
    }
    if (per_class[0] == 0 || per_class[1] == 0) {
        throw DomainError("degenerate labels");
    }
    // Balanced weighting: n / (classes * n_class).
    const double n = static_cast<double>(rows.size());
    setup.class_weight[0] = n / (2.0 * static_cast<double>(per_class[0]));
    setup.class_weight[1] = n / (2.0 * static_cast<double>(per_class[1]));
    return setup;
}

void grow_tree(std::span<const std::vector<double>> rows, std::span<const int> labels, const FitSetup& setup,
               const ForestConfig& config, std::size_t t, Forest& forest) {
    TreeBuilder builder(rows, labels, setup.class_weight, config, setup.dimension, derive_seed(config.seed, t));
    builder.grow(forest.trees[t], forest.training_leaves[t]);
}

Forest empty_forest(const ForestConfig& config, std::size_t dimension) {
    Forest forest;
    forest.config = config;
    forest.dimension = dimension;
    forest.trees.resize(config.tree_count);
    forest.training_leaves.resize(config.tree_count);
    return forest;
}

} // namespace

int DecisionTree::leaf_of(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].leaf_id;
}

int DecisionTree::depth() const {
    int d = 0;
    for (const TreeNode& n : nodes) {
        d = std::max(d, n.depth);
    }
    return d;
}

std::size_t resolved_features_per_split(const ForestConfig& config, std::size_t dimension) {
    if (config.features_per_split > 0) {
        return std::min(config.features_per_split, dimension);
    }
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dimension))));
}

Forest fit_forest(std::span<const std::vector<double>> rows, std::span<const int> labels, const ForestConfig& config) {
    const FitSetup setup = validate(rows, labels, config);
    Forest forest = empty_forest(config, setup.dimension);
    const auto trees = static_cast<std::ptrdiff_t>(config.tree_count);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < trees; ++t) {
        grow_tree(rows, labels, setup, config, static_cast<std::size_t>(t), forest);
    }
    return forest;
}

Forest fit_forest(const FeatureMatrix& matrix, const ForestConfig& config) {
    return fit_forest(matrix.rows, matrix.labels, config);
}

Forest fit_forest_serial(std::span<const std::vector<double>> rows, std::span<const int> labels,
                         const ForestConfig& config) {
    const FitSetup setup = validate(rows, labels, config);
    Forest forest = empty_forest(config, setup.dimension);
    for (std::size_t t = 0; t < config.tree_count; ++t) {
        grow_tree(rows, labels, setup, config, t, forest);
    }
    return forest;
}

ForestEmbedding embed(const Forest& forest, std::span<const double> x) {
    if (x.size() != forest.dimension) {
        throw DomainError("embedding input has dimension " + std::to_string(x.size()) + ", forest expects " +
                          std::to_string(forest.dimension));
    }
    ForestEmbedding e;
    e.leaves.reserve(forest.trees.size());
    for (const DecisionTree& tree : forest.trees) {
        e.leaves.push_back(static_cast<std::uint32_t>(tree.leaf_of(x)));
    }
    return e;
}

std::vector<ForestEmbedding> embed_rows(const Forest& forest, std::span<const std::vector<double>> rows) {
    std::vector<ForestEmbedding> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back(embed(forest, row));
    }
    return out;
}

std::vector<double> one_hot(const Forest& forest, const ForestEmbedding& embedding) {
    std::size_t width = 0;
    for (const DecisionTree& tree : forest.trees) {
        width += static_cast<std::size_t>(tree.leaf_count);
    }
    std::vector<double> v(width, 0.0);
    std::size_t offset = 0;
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        v[offset + embedding.leaves[t]] = 1.0;
        offset += static_cast<std::size_t>(forest.trees[t].leaf_count);
    }
    return v;
}

nlohmann::json forest_to_json(const Forest& forest) {
    const ForestConfig& c = forest.config;
    nlohmann::json doc = {
        {"format", "stylerank-forest"},
        {"version", 1},
        {"dimension", forest.dimension},
        {"config",
         {{"tree_count", c.tree_count},
          {"max_depth", c.max_depth},
          {"features_per_split", c.features_per_split},
          {"bootstrap", c.bootstrap},
          {"min_samples_split", c.min_samples_split},
          {"seed", c.seed}}},
    };
    auto trees = nlohmann::json::array();
    for (const DecisionTree& tree : forest.trees) {
        auto nodes = nlohmann::json::array();
        for (const TreeNode& n : tree.nodes) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_id, n.depth, n.class_mass[0],
                             n.class_mass[1]});
        }
        trees.push_back({{"leaf_count", tree.leaf_count}, {"nodes", std::move(nodes)}});
    }
    doc["trees"] = std::move(trees);
    return doc;
}

Forest forest_from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "stylerank-forest" || doc.value("version", 0) != 1) {
        throw DomainError("not a version 1 forest document");
    }
    Forest forest;
    const auto& c = doc.at("config");
    forest.config.tree_count = c.at("tree_count").get<std::size_t>();
    forest.config.max_depth = c.at("max_depth").get<int>();
    forest.config.features_per_split = c.at("features_per_split").get<std::size_t>();
    forest.config.bootstrap = c.at("bootstrap").get<bool>();
    forest.config.min_samples_split = c.at("min_samples_split").get<std::size_t>();
    forest.config.seed = c.at("seed").get<std::uint64_t>();
    forest.dimension = doc.at("dimension").get<std::size_t>();
    for (const auto& t : doc.at("trees")) {
        DecisionTree tree;
        tree.leaf_count = t.at("leaf_count").get<int>();
        for (const auto& n : t.at("nodes")) {
            TreeNode node;
            node.feature = n.at(0).get<int>();
            node.threshold = n.at(1).get<double>();
            node.left = n.at(2).get<int>();
            node.right = n.at(3).get<int>();
            node.leaf_id = n.at(4).get<int>();
            node.depth = n.at(5).get<int>();
            node.class_mass[0] = n.at(6).get<double>();
            node.class_mass[1] = n.at(7).get<double>();
            tree.nodes.push_back(node);
        }
        forest.trees.push_back(std::move(tree));
    }
    forest.training_leaves.assign(forest.trees.size(), {});
    return forest;
}

} // namespace stylerank
