#include "stylerank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

namespace stylerank {

namespace {

void check_samples(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) {
        throw DomainError("Mann-Whitney test needs two non-empty samples");
    }
}

// Doubled midranks of the pooled sample (x first, then y), so ties stay integral.
std::vector<long> doubled_ranks(std::span<const double> x, std::span<const double> y) {
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<long> ranks(pooled.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) {
            ++j;
        }
        // Positions i..j (0-based) share the rank (i + 1 + j + 1) / 2.
        const long twice = static_cast<long>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = twice;
        }
        i = j + 1;
    }
    return ranks;
}

double tie_term(std::span<const double> x, std::span<const double> y) {
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::sort(pooled.begin(), pooled.end());
    double sum = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) {
            ++j;
        }
        const double t = static_cast<double>(j - i);
        sum += t * t * t - t;
        i = j;
    }
    return sum;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be positive");
    }
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    return cells;
}

} // namespace

double mean(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("mean of an empty list");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double mann_whitney_u(std::span<const double> x, std::span<const double> y) {
    check_samples(x, y);
    const auto ranks = doubled_ranks(x, y);
    long twice_sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        twice_sum += ranks[i];
    }
    const double n1 = static_cast<double>(x.size());
    return static_cast<double>(twice_sum) / 2.0 - n1 * (n1 + 1.0) / 2.0;
}

double mann_whitney_exact(std::span<const double> x, std::span<const double> y) {
    check_samples(x, y);
    const auto ranks = doubled_ranks(x, y);
    const std::size_t n = ranks.size();
    // Enumerate subsets of the smaller group; W_x = total - W_y when y is smaller.
    const bool subset_is_x = x.size() <= y.size();
    const std::size_t m = subset_is_x ? x.size() : y.size();
    long total = 0;
    long observed_x = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total += ranks[i];
        if (i < x.size()) {
            observed_x += ranks[i];
        }
    }
    std::vector<long> sorted_ranks(ranks);
    std::sort(sorted_ranks.rbegin(), sorted_ranks.rend());
    const auto max_sum = static_cast<std::size_t>(
        std::accumulate(sorted_ranks.begin(), sorted_ranks.begin() + static_cast<std::ptrdiff_t>(m), 0L));
    std::vector<std::vector<long double>> ways(m + 1, std::vector<long double>(max_sum + 1, 0.0L));
    ways[0][0] = 1.0L;
    for (std::size_t k = 0; k < n; ++k) {
        const auto r = static_cast<std::size_t>(ranks[k]);
        for (std::size_t j = std::min(k + 1, m); j >= 1; --j) {
            auto& dst = ways[j];
            const auto& src = ways[j - 1];
            for (std::size_t s = max_sum; s >= r; --s) {
                dst[s] += src[s - r];
                if (s == r) break;
            }
        }
    }
    long double all = 0.0L;
    long double tail = 0.0L;
    for (std::size_t s = 0; s <= max_sum; ++s) {
        const long double w = ways[m][s];
        if (w == 0.0L) continue;
        all += w;
        const long sum_x = subset_is_x ? static_cast<long>(s) : total - static_cast<long>(s);
        if (sum_x >= observed_x) {
            tail += w;
        }
    }
    return static_cast<double>(std::clamp(tail / all, 0.0L, 1.0L));
}

double mann_whitney_normal(std::span<const double> x, std::span<const double> y) {
    const double u = mann_whitney_u(x, y);
    const double n1 = static_cast<double>(x.size());
    const double n2 = static_cast<double>(y.size());
    const double n = n1 + n2;
    const double mu = n1 * n2 / 2.0;
    const double ties = n > 1.0 ? tie_term(x, y) / (n * (n - 1.0)) : 0.0;
    const double variance = n1 * n2 / 12.0 * ((n + 1.0) - ties);
    if (variance <= 0.0) {
        return 1.0;
    }
    const double z = (u - mu - 0.5) / std::sqrt(variance);
    return std::clamp(0.5 * std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

double mann_whitney_one_sided(std::span<const double> x, std::span<const double> y) {
    check_samples(x, y);
    if (x.size() < kExactMannWhitneyBelow || y.size() < kExactMannWhitneyBelow) {
        return mann_whitney_exact(x, y);
    }
    return mann_whitney_normal(x, y);
}

std::vector<bool> bonferroni(std::span<const double> p_values, double alpha) {
    check_alpha(alpha);
    const double threshold = alpha / static_cast<double>(std::max<std::size_t>(p_values.size(), 1));
    std::vector<bool> reject(p_values.size());
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        reject[i] = p_values[i] <= threshold;
    }
    return reject;
}

std::vector<bool> benjamini_yekutieli(std::span<const double> p_values, double alpha) {
    check_alpha(alpha);
    const std::size_t m = p_values.size();
    std::vector<bool> reject(m, false);
    if (m == 0) {
        return reject;
    }
    double harmonic = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
        harmonic += 1.0 / static_cast<double>(i);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::size_t largest = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        const double threshold = static_cast<double>(k) * alpha / (static_cast<double>(m) * harmonic);
        if (p_values[order[k - 1]] <= threshold) {
            largest = k;
        }
    }
    for (std::size_t k = 0; k < largest; ++k) {
        reject[order[k]] = true;
    }
    return reject;
}

ChiSquareResult chi_square_2x2(long a_miss, long a_corr, long b_miss, long b_corr, bool yates) {
    if (a_miss < 0 || a_corr < 0 || b_miss < 0 || b_corr < 0) {
        throw DomainError("negative contingency count");
    }
    const double observed[2][2] = {{static_cast<double>(a_miss), static_cast<double>(a_corr)},
                                   {static_cast<double>(b_miss), static_cast<double>(b_corr)}};
    const double rows[2] = {observed[0][0] + observed[0][1], observed[1][0] + observed[1][1]};
    const double cols[2] = {observed[0][0] + observed[1][0], observed[0][1] + observed[1][1]};
    const double n = rows[0] + rows[1];
    if (rows[0] <= 0.0 || rows[1] <= 0.0) {
        throw DomainError("contingency row without observations");
    }
    if (cols[0] <= 0.0 || cols[1] <= 0.0) {
        return {};
    }
    ChiSquareResult result;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double expected = rows[i] * cols[j] / n;
            double diff = std::abs(observed[i][j] - expected);
            if (yates) {
                diff = std::max(0.0, diff - 0.5);
            }
            result.statistic += diff * diff / expected;
        }
    }
    // Survival function of chi-square with one degree of freedom.
    result.p_value = std::erfc(std::sqrt(result.statistic / 2.0));
    return result;
}

JudgmentCounts read_counts_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DomainError("empty counts CSV");
    }
    const auto header = split_cells(line);
    if (header != std::vector<std::string>{"sampleId", "nMiss", "nCorr"}) {
        throw DomainError("counts CSV header must be sampleId,nMiss,nCorr");
    }
    JudgmentCounts counts;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto cells = split_cells(line);
        if (cells.empty() || (cells.size() == 1 && cells[0].empty())) {
            continue;
        }
        if (cells.size() != 3) {
            throw DomainError("counts CSV line " + std::to_string(line_no) + " needs 3 cells");
        }
        SampleCounts c{std::stol(cells[1]), std::stol(cells[2])};
        if (c.miss < 0 || c.correct < 0 || c.miss + c.correct == 0) {
            throw DomainError("counts CSV line " + std::to_string(line_no) + " has no judgments");
        }
        if (!counts.emplace(cells[0], c).second) {
            throw DomainError("duplicate sample id '" + cells[0] + "'");
        }
    }
    return counts;
}

double ranking_accuracy(const std::map<std::string, double>& scores, const JudgmentCounts& counts, double alpha,
                        bool yates) {
    check_alpha(alpha);
    if (scores.size() != counts.size()) {
        throw DomainError("scores and counts cover different samples");
    }
    std::vector<std::string> ids;
    for (const auto& [id, c] : counts) {
        if (!scores.contains(id)) {
            throw DomainError("no score for sample '" + id + "'");
        }
        if (c.miss + c.correct <= 0) {
            throw DomainError("sample '" + id + "' has no judgments");
        }
        ids.push_back(id);
    }
    if (ids.size() < 2) {
        throw DomainError("ranking accuracy needs at least two samples");
    }
    std::size_t agree = 0;
    std::size_t significant = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            const SampleCounts& a = counts.at(ids[i]);
            const SampleCounts& b = counts.at(ids[j]);
            if (!(chi_square_2x2(a.miss, a.correct, b.miss, b.correct, yates).p_value < alpha)) {
                continue;
            }
            ++significant;
            const double si = scores.at(ids[i]);
            const double sj = scores.at(ids[j]);
            const double ti = a.miss_rate();
            const double tj = b.miss_rate();
            const bool score_tie = si == sj;
            const bool truth_tie = ti == tj;
            if (score_tie || truth_tie) {
                agree += (score_tie && truth_tie) ? 1 : 0;
            } else {
                agree += ((si < sj) == (ti < tj)) ? 1 : 0;
            }
        }
    }
    if (significant == 0) {
        throw DomainError("empty denominator: no pair is significant at alpha " + std::to_string(alpha));
    }
    return static_cast<double>(agree) / static_cast<double>(significant);
}

TrialSummary summarize_trials(std::span<const TrialOutcome> trials, double alpha) {
    if (trials.empty()) {
        throw DomainError("no trials to summarize");
    }
    std::vector<double> p;
    TrialSummary s;
    for (const TrialOutcome& t : trials) {
        s.mu += t.mean_x > t.mean_y ? 1.0 : 0.0;
        s.sig += t.p_value < alpha ? 1.0 : 0.0;
        p.push_back(t.p_value);
    }
    const auto fdr = benjamini_yekutieli(p, alpha);
    const auto bon = bonferroni(p, alpha);
    s.fdr = static_cast<double>(std::count(fdr.begin(), fdr.end(), true));
    s.bon = static_cast<double>(std::count(bon.begin(), bon.end(), true));
    const double n = static_cast<double>(trials.size());
    s.mu /= n;
    s.sig /= n;
    s.fdr /= n;
    s.bon /= n;
    return s;
}

} // namespace stylerank
