#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylerank/forest.hpp"

namespace stylerank {

/// Normalized dot product. Throws DomainError on zero vectors or
/// mismatched dimensions.
double cosine(std::span<const double> a, std::span<const double> b);

/// Cosine of the one-hot forms of two embeddings of the same forest, i.e.
/// the fraction of trees in which both reach the same leaf.
double leaf_cosine(const ForestEmbedding& a, const ForestEmbedding& b);

/// Embeddings of every candidate and corpus file under one feature's forest.
struct FeatureEmbeddings {
    std::string feature;
    std::vector<ForestEmbedding> candidates;
    std::vector<ForestEmbedding> corpus;
};

/// Mean leaf cosine between one candidate and every corpus file, over all
/// features.
double style_score(std::size_t candidate, std::span<const FeatureEmbeddings> features);

struct ScoreReport {
    std::vector<std::string> candidate_ids;
    std::vector<std::string> feature_names;
    std::vector<double> global;                  // per candidate
    std::vector<std::vector<double>> per_feature;  // [candidate][feature]
    std::vector<std::size_t> ranking;            // candidate indices, best first

    std::size_t find(const std::string& id) const;
};

/// Candidate indices by descending score, ties by ascending id.
std::vector<std::size_t> rank_order(std::span<const double> scores, std::span<const std::string> ids);

/// Scores every candidate against the corpus, one column per feature.
/// OpenMP over candidates.
ScoreReport per_feature_scores(std::span<const std::string> candidate_ids,
                               std::span<const FeatureEmbeddings> features);
/// Single-threaded reference for per_feature_scores.
ScoreReport per_feature_scores_serial(std::span<const std::string> candidate_ids,
                                      std::span<const FeatureEmbeddings> features);

nlohmann::json report_to_json(const ScoreReport& report);
ScoreReport report_from_json(const nlohmann::json& doc);
void write_report_csv(std::ostream& out, const ScoreReport& report);
ScoreReport read_report_csv(std::istream& in);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

} // namespace stylerank
