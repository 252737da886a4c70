#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stylerank/error.hpp"

namespace stylerank {

/// Mann-Whitney U of `x` against `y`, ties scored by midranks.
double mann_whitney_u(std::span<const double> x, std::span<const double> y);

/// P(U >= observed) under the exact permutation distribution (ties kept).
double mann_whitney_exact(std::span<const double> x, std::span<const double> y);

/// Normal approximation with tie and continuity correction.
double mann_whitney_normal(std::span<const double> x, std::span<const double> y);

/// One-sided test of the alternative "x tends to exceed y". Exact when
/// either side has fewer than 8 values, normal approximation otherwise.
double mann_whitney_one_sided(std::span<const double> x, std::span<const double> y);

inline constexpr std::size_t kExactMannWhitneyBelow = 8;

std::vector<bool> bonferroni(std::span<const double> p_values, double alpha);

/// Step-up false discovery rate control under arbitrary dependence.
std::vector<bool> benjamini_yekutieli(std::span<const double> p_values, double alpha);

struct ChiSquareResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Pearson chi-square on [[a_miss, a_corr], [b_miss, b_corr]], 1 dof.
ChiSquareResult chi_square_2x2(long a_miss, long a_corr, long b_miss, long b_corr, bool yates = true);

struct SampleCounts {
    long miss = 0;
    long correct = 0;

    double miss_rate() const { return static_cast<double>(miss) / static_cast<double>(miss + correct); }
};

using JudgmentCounts = std::map<std::string, SampleCounts>;

/// CSV with header sampleId,nMiss,nCorr.
JudgmentCounts read_counts_csv(std::istream& in);

/// Fraction of significantly different sample pairs (chi-square p < alpha)
/// whose score order agrees with their miss-rate order. Throws DomainError
/// when no pair is significant.
double ranking_accuracy(const std::map<std::string, double>& scores, const JudgmentCounts& counts, double alpha,
                        bool yates = true);

struct TrialOutcome {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double p_value = 1.0;
};

/// Table-style batch summary: mu = share of trials with mean_x > mean_y,
/// sig = share with p < alpha, fdr/bon = share rejected after correcting
/// across the batch.
struct TrialSummary {
    double mu = 0.0;
    double sig = 0.0;
    double fdr = 0.0;
    double bon = 0.0;
};

TrialSummary summarize_trials(std::span<const TrialOutcome> trials, double alpha = 0.05);

double mean(std::span<const double> values);

} // namespace stylerank
