#include "stylerank/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace stylerank {

namespace {

void check_features(std::span<const FeatureEmbeddings> features, std::size_t candidate_count) {
    if (features.empty()) {
        throw DomainError("empty feature set");
    }
    for (const auto& f : features) {
        if (f.corpus.empty()) {
            throw DomainError("empty corpus");
        }
        if (f.candidates.size() != candidate_count) {
            throw DomainError("feature '" + f.feature + "' has embeddings for " + std::to_string(f.candidates.size()) +
                              " candidates, expected " + std::to_string(candidate_count));
        }
    }
}

double feature_score(std::size_t candidate, const FeatureEmbeddings& f) {
    double sum = 0.0;
    for (const ForestEmbedding& c : f.corpus) {
        sum += leaf_cosine(f.candidates[candidate], c);
    }
    return sum / static_cast<double>(f.corpus.size());
}

ScoreReport empty_report(std::span<const std::string> ids, std::span<const FeatureEmbeddings> features) {
    check_features(features, ids.size());
    ScoreReport report;
    report.candidate_ids.assign(ids.begin(), ids.end());
    for (const auto& f : features) {
        report.feature_names.push_back(f.feature);
    }
    report.global.assign(ids.size(), 0.0);
    report.per_feature.assign(ids.size(), std::vector<double>(features.size(), 0.0));
    return report;
}

void score_candidate(std::size_t g, std::span<const FeatureEmbeddings> features, ScoreReport& report) {
    double sum = 0.0;
    for (std::size_t f = 0; f < features.size(); ++f) {
        const double s = feature_score(g, features[f]);
        report.per_feature[g][f] = s;
        sum += s;
    }
    report.global[g] = sum / static_cast<double>(features.size());
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

} // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DomainError("cosine of vectors with different dimensions");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw DomainError("cosine of a zero vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double leaf_cosine(const ForestEmbedding& a, const ForestEmbedding& b) {
    if (a.leaves.size() != b.leaves.size() || a.leaves.empty()) {
        throw DomainError("embeddings from different or empty forests");
    }
    std::size_t matches = 0;
    for (std::size_t t = 0; t < a.leaves.size(); ++t) {
        matches += a.leaves[t] == b.leaves[t] ? 1 : 0;
    }
    return static_cast<double>(matches) / static_cast<double>(a.leaves.size());
}

double style_score(std::size_t candidate, std::span<const FeatureEmbeddings> features) {
    if (features.empty()) {
        throw DomainError("empty feature set");
    }
    double sum = 0.0;
    for (const auto& f : features) {
        if (f.corpus.empty()) {
            throw DomainError("empty corpus");
        }
        if (candidate >= f.candidates.size()) {
            throw DomainError("candidate index out of range");
        }
        sum += feature_score(candidate, f);
    }
    return sum / static_cast<double>(features.size());
}

std::size_t ScoreReport::find(const std::string& id) const {
    const auto it = std::find(candidate_ids.begin(), candidate_ids.end(), id);
    if (it == candidate_ids.end()) {
        throw DomainError("unknown candidate '" + id + "'");
    }
    return static_cast<std::size_t>(it - candidate_ids.begin());
}

std::vector<std::size_t> rank_order(std::span<const double> scores, std::span<const std::string> ids) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return ids[a] < ids[b];
    });
    return order;
}

ScoreReport per_feature_scores(std::span<const std::string> candidate_ids,
                               std::span<const FeatureEmbeddings> features) {
    ScoreReport report = empty_report(candidate_ids, features);
    const auto n = static_cast<std::ptrdiff_t>(candidate_ids.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t g = 0; g < n; ++g) {
        score_candidate(static_cast<std::size_t>(g), features, report);
    }
    report.ranking = rank_order(report.global, report.candidate_ids);
    return report;
}

ScoreReport per_feature_scores_serial(std::span<const std::string> candidate_ids,
                                      std::span<const FeatureEmbeddings> features) {
    ScoreReport report = empty_report(candidate_ids, features);
    for (std::size_t g = 0; g < candidate_ids.size(); ++g) {
        score_candidate(g, features, report);
    }
    report.ranking = rank_order(report.global, report.candidate_ids);
    return report;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::json report_to_json(const ScoreReport& report) {
    auto candidates = nlohmann::json::array();
    for (std::size_t r = 0; r < report.ranking.size(); ++r) {
        const std::size_t g = report.ranking[r];
        nlohmann::json per = nlohmann::json::object();
        for (std::size_t f = 0; f < report.feature_names.size(); ++f) {
            per[report.feature_names[f]] = report.per_feature[g][f];
        }
        candidates.push_back({{"rank", r + 1},
                              {"candidateId", report.candidate_ids[g]},
                              {"globalScore", report.global[g]},
                              {"perFeature", std::move(per)}});
    }
    return {{"features", report.feature_names}, {"candidates", std::move(candidates)}};
}

ScoreReport report_from_json(const nlohmann::json& doc) {
    ScoreReport report;
    report.feature_names = doc.at("features").get<std::vector<std::string>>();
    for (const auto& c : doc.at("candidates")) {
        report.candidate_ids.push_back(c.at("candidateId").get<std::string>());
        report.global.push_back(c.at("globalScore").get<double>());
        std::vector<double> per;
        for (const auto& name : report.feature_names) {
            per.push_back(c.at("perFeature").at(name).get<double>());
        }
        report.per_feature.push_back(std::move(per));
    }
    report.ranking = rank_order(report.global, report.candidate_ids);
    return report;
}

void write_report_csv(std::ostream& out, const ScoreReport& report) {
    out << "candidateId,globalScore";
    for (const auto& name : report.feature_names) {
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t g : report.ranking) {
        out << report.candidate_ids[g] << ',' << format_double(report.global[g]);
        for (double s : report.per_feature[g]) {
            out << ',' << format_double(s);
        }
        out << '\n';
    }
}

ScoreReport read_report_csv(std::istream& in) {
    ScoreReport report;
    std::string line;
    if (!std::getline(in, line)) {
        throw DomainError("empty score report");
    }
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "candidateId" || header[1] != "globalScore") {
        throw DomainError("score report CSV must start with candidateId,globalScore");
    }
    report.feature_names.assign(header.begin() + 2, header.end());
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DomainError("score report row has " + std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        }
        report.candidate_ids.push_back(cells[0]);
        report.global.push_back(std::stod(cells[1]));
        std::vector<double> per;
        for (std::size_t i = 2; i < cells.size(); ++i) {
            per.push_back(std::stod(cells[i]));
        }
        report.per_feature.push_back(std::move(per));
    }
    report.ranking = rank_order(report.global, report.candidate_ids);
    return report;
}

} // namespace stylerank
