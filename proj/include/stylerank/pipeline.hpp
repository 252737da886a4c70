#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylerank/features.hpp"
#include "stylerank/forest.hpp"
#include "stylerank/similarity.hpp"
#include "stylerank/stats.hpp"

namespace stylerank {

struct StyleRankOptions {
    std::vector<Feature> features = all_features();
    ForestConfig forest;
    std::size_t vocabulary_cap = kMaxCategories;
};

/// Fits one forest per feature on candidates (label 0) against the corpus
/// (label 1) and embeds every file. FileFeatures entries follow
/// `options.features`.
std::vector<FeatureEmbeddings> embed_features(std::span<const FileFeatures> corpus,
                                              std::span<const FileFeatures> candidates,
                                              const StyleRankOptions& options);

ScoreReport rank_candidates(std::span<const FileFeatures> corpus, std::span<const FileFeatures> candidates,
                            std::span<const std::string> candidate_ids, const StyleRankOptions& options);

enum class Method : int { StyleRank = 0, Cosine = 1, Manhattan = 2, Euclidean = 3 };
inline constexpr std::size_t kMethodCount = 4;
std::string_view method_name(Method m);

/// Per candidate: mean over corpus files and features of 1 - distance
/// between capped frequency vectors.
std::vector<double> raw_distance_scores(std::span<const FileFeatures> corpus, std::span<const FileFeatures> candidates,
                                        const StyleRankOptions& options, Method distance);

/// One trial: candidates = same-style ∪ other-style, scored against corpus;
/// x = same-style scores, y = other-style scores.
TrialOutcome run_style_trial(std::span<const FileFeatures> corpus, std::span<const FileFeatures> same_style,
                             std::span<const FileFeatures> other_style, const StyleRankOptions& options);

/// The same trial evaluated by StyleRank and the three raw distances.
std::array<TrialOutcome, kMethodCount> run_trial_all_methods(std::span<const FileFeatures> corpus,
                                                             std::span<const FileFeatures> same_style,
                                                             std::span<const FileFeatures> other_style,
                                                             const StyleRankOptions& options);

struct Experiment1Config {
    std::vector<std::size_t> sizes = {10};
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    StyleRankOptions options;
};

struct Experiment1Row {
    std::size_t size = 0;
    std::size_t style_a = 0;
    std::size_t style_b = 0;
    std::array<TrialSummary, kMethodCount> summary;
    std::array<std::vector<TrialOutcome>, kMethodCount> trials;
};

/// Every size and ordered style pair; trials run in parallel.
std::vector<Experiment1Row> run_experiment1(std::span<const std::vector<FileFeatures>> styles,
                                            const Experiment1Config& config);
/// Single-threaded reference for run_experiment1.
std::vector<Experiment1Row> run_experiment1_serial(std::span<const std::vector<FileFeatures>> styles,
                                                   const Experiment1Config& config);

struct AccuracyRow {
    std::string method;
    std::vector<std::optional<double>> value;   // per alpha; empty when no pair is significant
    std::vector<std::optional<double>> stderr_;  // per alpha, random baseline only
};

struct Experiment2Result {
    std::vector<double> alphas;
    AccuracyRow stylerank;
    AccuracyRow random;
};

Experiment2Result run_experiment2(const std::map<std::string, double>& scores, const JudgmentCounts& counts,
                                  std::span<const double> alphas, std::size_t random_trials, std::uint64_t seed);

struct PairwiseComparison {
    std::size_t model_x = 0;
    std::size_t model_y = 0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double p_value = 1.0;  // one-sided, alternative: model_x scores exceed model_y
};

struct ModelComparison {
    std::vector<std::string> models;
    std::vector<double> means;
    std::vector<PairwiseComparison> comparisons;
    ScoreReport report;
};

/// Pools every model's outputs as the candidate set and compares the
/// per-model score distributions in both directions.
ModelComparison compare_models(std::span<const FileFeatures> corpus,
                               std::span<const std::vector<FileFeatures>> models,
                               std::span<const std::string> model_names,
                               std::span<const std::vector<std::string>> file_ids, const StyleRankOptions& options);

} // namespace stylerank
