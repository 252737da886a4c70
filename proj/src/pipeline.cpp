#include "stylerank/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "stylerank/corpus.hpp"
#include "stylerank/rng.hpp"

namespace stylerank {

namespace {

void check_inputs(std::span<const FileFeatures> corpus, std::span<const FileFeatures> candidates,
                  const StyleRankOptions& options) {
    if (options.features.empty()) {
        throw DomainError("empty feature set");
    }
    if (corpus.empty()) {
        throw DomainError("empty corpus");
    }
    if (candidates.empty()) {
        throw DomainError("no candidates");
    }
    for (auto group : {corpus, candidates}) {
        for (const FileFeatures& f : group) {
            if (f.size() != options.features.size()) {
                throw DomainError("file features do not match the selected feature set");
            }
        }
    }
}

// Candidates first (label 0), corpus after (label 1).
FeatureMatrix matrix_for(std::size_t f, std::span<const FileFeatures> corpus, std::span<const FileFeatures> candidates,
                         const StyleRankOptions& options) {
    std::vector<CategoricalDistribution> dists;
    std::vector<int> labels;
    dists.reserve(corpus.size() + candidates.size());
    for (const FileFeatures& c : candidates) {
        dists.push_back(c[f]);
        labels.push_back(0);
    }
    for (const FileFeatures& c : corpus) {
        dists.push_back(c[f]);
        labels.push_back(1);
    }
    return build_feature_matrix(dists, labels, options.features[f], options.vocabulary_cap);
}

double raw_similarity(std::span<const double> a, std::span<const double> b, Method distance) {
    double value = 0.0;
    switch (distance) {
    case Method::Cosine: {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dot += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        // A zero vector has no direction; count it as orthogonal.
        return (na == 0.0 || nb == 0.0) ? 0.0 : dot / (std::sqrt(na) * std::sqrt(nb));
    }
    case Method::Manhattan:
        for (std::size_t i = 0; i < a.size(); ++i) {
            value += std::abs(a[i] - b[i]);
        }
        return 1.0 - value;
    case Method::Euclidean:
        for (std::size_t i = 0; i < a.size(); ++i) {
            value += (a[i] - b[i]) * (a[i] - b[i]);
        }
        return 1.0 - std::sqrt(value);
    default:
        throw DomainError("not a raw distance");
    }
}

template <typename T>
std::vector<T> pick(std::span<const T> items, std::span<const std::size_t> indices) {
    std::vector<T> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        out.push_back(items[i]);
    }
    return out;
}

TrialOutcome outcome_from_scores(std::span<const double> scores, std::size_t same_count) {
    const auto x = scores.subspan(0, same_count);
    const auto y = scores.subspan(same_count);
    return {mean(x), mean(y), mann_whitney_one_sided(x, y)};
}

std::vector<FileFeatures> concat(std::span<const FileFeatures> a, std::span<const FileFeatures> b) {
    std::vector<FileFeatures> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

struct TrialJob {
    std::size_t row = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
};

std::vector<Experiment1Row> plan_experiment1(std::span<const std::vector<FileFeatures>> styles,
                                             const Experiment1Config& config, std::vector<TrialJob>& jobs) {
    if (styles.size() < 2) {
        throw DomainError("experiment 1 needs at least two styles");
    }
    if (config.trials == 0 || config.sizes.empty()) {
        throw DomainError("experiment 1 needs at least one size and one trial");
    }
    const std::size_t largest = *std::max_element(config.sizes.begin(), config.sizes.end());
    for (std::size_t s = 0; s < styles.size(); ++s) {
        if (styles[s].size() < 2 * largest) {
            throw DomainError("style " + std::to_string(s) + " has " + std::to_string(styles[s].size()) +
                              " files, size " + std::to_string(largest) + " needs " + std::to_string(2 * largest));
        }
    }
    std::vector<Experiment1Row> rows;
    for (std::size_t size : config.sizes) {
        for (std::size_t a = 0; a < styles.size(); ++a) {
            for (std::size_t b = 0; b < styles.size(); ++b) {
                if (a == b) {
                    continue;
                }
                Experiment1Row row;
                row.size = size;
                row.style_a = a;
                row.style_b = b;
                for (auto& t : row.trials) {
                    t.resize(config.trials);
                }
                const std::uint64_t row_seed = derive_seed(config.seed, rows.size());
                for (std::size_t t = 0; t < config.trials; ++t) {
                    jobs.push_back({rows.size(), t, derive_seed(row_seed, t)});
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

void run_job(const TrialJob& job, std::span<const std::vector<FileFeatures>> styles, const Experiment1Config& config,
             std::vector<Experiment1Row>& rows) {
    Experiment1Row& row = rows[job.row];
    const auto& a = styles[row.style_a];
    const auto& b = styles[row.style_b];
    const TrialSplit split = make_trial_split(a.size(), b.size(), row.size, job.seed);
    StyleRankOptions options = config.options;
    options.forest.seed = derive_seed(job.seed, 1);
    const auto corpus = pick<FileFeatures>(a, split.corpus);
    const auto same = pick<FileFeatures>(a, split.candidates_a);
    const auto other = pick<FileFeatures>(b, split.candidates_b);
    const auto outcomes = run_trial_all_methods(corpus, same, other, options);
    for (std::size_t m = 0; m < kMethodCount; ++m) {
        row.trials[m][job.trial] = outcomes[m];
    }
}

void summarize_rows(std::vector<Experiment1Row>& rows, double alpha) {
    for (Experiment1Row& row : rows) {
        for (std::size_t m = 0; m < kMethodCount; ++m) {
            row.summary[m] = summarize_trials(row.trials[m], alpha);
        }
    }
}

std::optional<double> accuracy_or_empty(const std::map<std::string, double>& scores, const JudgmentCounts& counts,
                                        double alpha) {
    try {
        return ranking_accuracy(scores, counts, alpha);
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

} // namespace

std::string_view method_name(Method m) {
    switch (m) {
    case Method::StyleRank: return "StyleRank";
    case Method::Cosine: return "Cosine";
    case Method::Manhattan: return "Manhattan";
    case Method::Euclidean: return "Euclidean";
    }
    return "?";
}

std::vector<FeatureEmbeddings> embed_features(std::span<const FileFeatures> corpus,
                                              std::span<const FileFeatures> candidates,
                                              const StyleRankOptions& options) {
    check_inputs(corpus, candidates, options);
    std::vector<FeatureEmbeddings> out;
    out.reserve(options.features.size());
    for (std::size_t f = 0; f < options.features.size(); ++f) {
        const FeatureMatrix matrix = matrix_for(f, corpus, candidates, options);
        ForestConfig config = options.forest;
        config.seed = derive_seed(options.forest.seed, static_cast<std::uint64_t>(options.features[f]));
        const Forest forest = fit_forest(matrix, config);
        const auto embeddings = embed_rows(forest, matrix.rows);
        FeatureEmbeddings fe;
        fe.feature = std::string(feature_spec(options.features[f]).name);
        fe.candidates.assign(embeddings.begin(), embeddings.begin() + static_cast<std::ptrdiff_t>(candidates.size()));
        fe.corpus.assign(embeddings.begin() + static_cast<std::ptrdiff_t>(candidates.size()), embeddings.end());
        out.push_back(std::move(fe));
    }
    return out;
}

ScoreReport rank_candidates(std::span<const FileFeatures> corpus, std::span<const FileFeatures> candidates,
                            std::span<const std::string> candidate_ids, const StyleRankOptions& options) {
    if (candidate_ids.size() != candidates.size()) {
        throw DomainError("one id per candidate required");
    }
    const auto features = embed_features(corpus, candidates, options);
    return per_feature_scores(candidate_ids, features);
}

std::vector<double> raw_distance_scores(std::span<const FileFeatures> corpus, std::span<const FileFeatures> candidates,
                                        const StyleRankOptions& options, Method distance) {
    check_inputs(corpus, candidates, options);
    std::vector<double> scores(candidates.size(), 0.0);
    for (std::size_t f = 0; f < options.features.size(); ++f) {
        const FeatureMatrix matrix = matrix_for(f, corpus, candidates, options);
        for (std::size_t g = 0; g < candidates.size(); ++g) {
            for (std::size_t c = 0; c < corpus.size(); ++c) {
                scores[g] += raw_similarity(matrix.rows[g], matrix.rows[candidates.size() + c], distance);
            }
        }
    }
    const double pairs = static_cast<double>(corpus.size() * options.features.size());
    for (double& s : scores) {
        s /= pairs;
    }
    return scores;
}

TrialOutcome run_style_trial(std::span<const FileFeatures> corpus, std::span<const FileFeatures> same_style,
                             std::span<const FileFeatures> other_style, const StyleRankOptions& options) {
    const auto candidates = concat(same_style, other_style);
    const auto features = embed_features(corpus, candidates, options);
    std::vector<double> scores(candidates.size());
    for (std::size_t g = 0; g < candidates.size(); ++g) {
        scores[g] = style_score(g, features);
    }
    return outcome_from_scores(scores, same_style.size());
}

std::array<TrialOutcome, kMethodCount> run_trial_all_methods(std::span<const FileFeatures> corpus,
                                                             std::span<const FileFeatures> same_style,
                                                             std::span<const FileFeatures> other_style,
                                                             const StyleRankOptions& options) {
    std::array<TrialOutcome, kMethodCount> out;
    out[0] = run_style_trial(corpus, same_style, other_style, options);
    const auto candidates = concat(same_style, other_style);
    for (Method m : {Method::Cosine, Method::Manhattan, Method::Euclidean}) {
        const auto scores = raw_distance_scores(corpus, candidates, options, m);
        out[static_cast<std::size_t>(m)] = outcome_from_scores(scores, same_style.size());
    }
    return out;
}

std::vector<Experiment1Row> run_experiment1(std::span<const std::vector<FileFeatures>> styles,
                                            const Experiment1Config& config) {
    std::vector<TrialJob> jobs;
    auto rows = plan_experiment1(styles, config, jobs);
    const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        run_job(jobs[static_cast<std::size_t>(j)], styles, config, rows);
    }
    summarize_rows(rows, config.alpha);
    return rows;
}

std::vector<Experiment1Row> run_experiment1_serial(std::span<const std::vector<FileFeatures>> styles,
                                                   const Experiment1Config& config) {
    std::vector<TrialJob> jobs;
    auto rows = plan_experiment1(styles, config, jobs);
    for (const TrialJob& job : jobs) {
        run_job(job, styles, config, rows);
    }
    summarize_rows(rows, config.alpha);
    return rows;
}

Experiment2Result run_experiment2(const std::map<std::string, double>& scores, const JudgmentCounts& counts,
                                  std::span<const double> alphas, std::size_t random_trials, std::uint64_t seed) {
    for (const auto& [id, c] : counts) {
        if (!scores.contains(id)) {
            throw DomainError("no score for sample '" + id + "'");
        }
    }
    if (scores.size() != counts.size()) {
        throw DomainError("scores and counts cover different samples");
    }
    Experiment2Result result;
    result.alphas.assign(alphas.begin(), alphas.end());
    result.stylerank.method = "StyleRank";
    result.random.method = "Random";

    std::vector<std::vector<double>> random_values(alphas.size());
    for (std::size_t t = 0; t < random_trials; ++t) {
        Rng rng(derive_seed(seed, t));
        std::map<std::string, double> shuffled;
        for (const auto& [id, s] : scores) {
            shuffled[id] = rng.uniform();
        }
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            if (auto v = accuracy_or_empty(shuffled, counts, alphas[a])) {
                random_values[a].push_back(*v);
            }
        }
    }
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        result.stylerank.value.push_back(accuracy_or_empty(scores, counts, alphas[a]));
        result.stylerank.stderr_.push_back(std::nullopt);
        const auto& vals = random_values[a];
        if (vals.empty()) {
            result.random.value.push_back(std::nullopt);
            result.random.stderr_.push_back(std::nullopt);
            continue;
        }
        const double m = mean(vals);
        double var = 0.0;
        for (double v : vals) {
            var += (v - m) * (v - m);
        }
        var = vals.size() > 1 ? var / static_cast<double>(vals.size() - 1) : 0.0;
        result.random.value.push_back(m);
        result.random.stderr_.push_back(std::sqrt(var / static_cast<double>(vals.size())));
    }
    return result;
}

ModelComparison compare_models(std::span<const FileFeatures> corpus,
                               std::span<const std::vector<FileFeatures>> models,
                               std::span<const std::string> model_names,
                               std::span<const std::vector<std::string>> file_ids, const StyleRankOptions& options) {
    if (models.size() < 2) {
        throw DomainError("comparing models needs at least two models");
    }
    if (model_names.size() != models.size() || file_ids.size() != models.size()) {
        throw DomainError("one name and id list per model required");
    }
    std::vector<FileFeatures> pooled;
    std::vector<std::string> ids;
    std::vector<std::size_t> owner;
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (models[k].empty() || models[k].size() != file_ids[k].size()) {
            throw DomainError("model '" + model_names[k] + "' has no files or mismatched ids");
        }
        for (std::size_t i = 0; i < models[k].size(); ++i) {
            pooled.push_back(models[k][i]);
            ids.push_back(model_names[k] + "/" + file_ids[k][i]);
            owner.push_back(k);
        }
    }
    ModelComparison result;
    result.models.assign(model_names.begin(), model_names.end());
    result.report = rank_candidates(corpus, pooled, ids, options);
    std::vector<std::vector<double>> per_model(models.size());
    for (std::size_t g = 0; g < pooled.size(); ++g) {
        per_model[owner[g]].push_back(result.report.global[g]);
    }
    for (const auto& scores : per_model) {
        result.means.push_back(mean(scores));
    }
    for (std::size_t i = 0; i < models.size(); ++i) {
        for (std::size_t j = 0; j < models.size(); ++j) {
            if (i != j) {
                result.comparisons.push_back(
                    {i, j, result.means[i], result.means[j], mann_whitney_one_sided(per_model[i], per_model[j])});
            }
        }
    }
    return result;
}

} // namespace stylerank
