#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "stylerank/error.hpp"
#include "stylerank/features.hpp"

namespace stylerank {

struct ForestConfig {
    std::size_t tree_count = 500;
    int max_depth = 5;
    /// Candidate dimensions per split; 0 means ceil(sqrt(d)).
    std::size_t features_per_split = 0;
    bool bootstrap = true;
    std::size_t min_samples_split = 2;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_id = -1;
    int depth = 0;
    double class_mass[2] = {0.0, 0.0};  // class-weighted in-bag mass

    bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int leaf_count = 0;

    int leaf_of(std::span<const double> x) const;
    int depth() const;
};

struct Forest {
    ForestConfig config;
    std::size_t dimension = 0;
    std::vector<DecisionTree> trees;
    /// Leaf reached by each training row during fitting, per tree; -1 for
    /// rows left out of that tree's bootstrap sample.
    std::vector<std::vector<int>> training_leaves;
};

/// Terminal node per tree for one input.
struct ForestEmbedding {
    std::vector<std::uint32_t> leaves;
    friend bool operator==(const ForestEmbedding&, const ForestEmbedding&) = default;
};

std::size_t resolved_features_per_split(const ForestConfig& config, std::size_t dimension);

/// Trees are built in parallel; tree i draws from stream i of the seed, so
/// the result equals fit_forest_serial bit for bit.
Forest fit_forest(std::span<const std::vector<double>> rows, std::span<const int> labels, const ForestConfig& config);
Forest fit_forest(const FeatureMatrix& matrix, const ForestConfig& config);
Forest fit_forest_serial(std::span<const std::vector<double>> rows, std::span<const int> labels,
                         const ForestConfig& config);

ForestEmbedding embed(const Forest& forest, std::span<const double> x);
std::vector<ForestEmbedding> embed_rows(const Forest& forest, std::span<const std::vector<double>> rows);

/// The {0,1}^(sum of leaf counts) indicator form of an embedding.
std::vector<double> one_hot(const Forest& forest, const ForestEmbedding& embedding);

nlohmann::json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& doc);

} // namespace stylerank
