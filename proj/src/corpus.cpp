#include "stylerank/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <tuple>

#include "stylerank/rng.hpp"
#include "stylerank/similarity.hpp"

namespace stylerank {

PitchSignature pitch_signature(std::span<const Note> notes, std::size_t length) {
    std::vector<Note> sorted(notes.begin(), notes.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const Note& a, const Note& b) { return std::tie(a.onset, a.pitch) < std::tie(b.onset, b.pitch); });
    PitchSignature sig;
    const std::size_t k = std::min(length, sorted.size());
    for (std::size_t i = 0; i < k; ++i) {
        sig.head.push_back(sorted[i].pitch);
        sig.tail.push_back(sorted[sorted.size() - k + i].pitch);
    }
    return sig;
}

std::size_t levenshtein(std::span<const int> a, std::span<const int> b) {
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

double levenshtein_norm(std::span<const int> a, std::span<const int> b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) {
        return 0.0;
    }
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

DedupResult dedup(std::span<const PitchSignature> files, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw DomainError("dedup threshold must lie in [0, 1]");
    }
    const std::size_t n = files.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    std::vector<DuplicatePair> measured(pairs.size());
    const auto count = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        const auto [i, j] = pairs[static_cast<std::size_t>(k)];
        measured[static_cast<std::size_t>(k)] = {i, j, levenshtein_norm(files[i].head, files[j].head),
                                                 levenshtein_norm(files[i].tail, files[j].tail), false};
    }

    DedupResult result;
    std::vector<bool> dropped(n, false);
    for (DuplicatePair& p : measured) {
        if (!(p.head_distance < threshold || p.tail_distance < threshold)) {
            continue;
        }
        if (!dropped[p.first] && !dropped[p.second]) {
            dropped[p.second] = true;
            p.removed = true;
        }
        result.pairs.push_back(p);
    }
    for (std::size_t i = 0; i < n; ++i) {
        (dropped[i] ? result.removed : result.kept).push_back(i);
    }
    return result;
}

void write_dedup_csv(std::ostream& out, const DedupResult& result, std::span<const std::string> names) {
    out << "fileA,fileB,headDist,tailDist,removed\n";
    for (const DuplicatePair& p : result.pairs) {
        out << names[p.first] << ',' << names[p.second] << ',' << format_double(p.head_distance) << ','
            << format_double(p.tail_distance) << ',' << (p.removed ? "true" : "false") << '\n';
    }
}

TrialSplit make_trial_split(std::size_t style_a_size, std::size_t style_b_size, std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw DomainError("trial corpus size must be positive");
    }
    if (style_a_size < 2 * n || style_b_size < n) {
        std::string msg = "insufficient files for a size-" + std::to_string(n) + " trial:";
        if (style_a_size < 2 * n) {
            msg += " style A needs " + std::to_string(2 * n - style_a_size) + " more";
        }
        if (style_b_size < n) {
            msg += " style B needs " + std::to_string(n - style_b_size) + " more";
        }
        throw DomainError(msg);
    }
    std::vector<std::size_t> a(style_a_size);
    std::vector<std::size_t> b(style_b_size);
    std::iota(a.begin(), a.end(), std::size_t{0});
    std::iota(b.begin(), b.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0));
    rng.shuffle(std::span(a));
    rng.shuffle(std::span(b));
    TrialSplit split;
    split.corpus.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n));
    split.candidates_a.assign(a.begin() + static_cast<std::ptrdiff_t>(n), a.begin() + static_cast<std::ptrdiff_t>(2 * n));
    split.candidates_b.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(n));
    return split;
}

} // namespace stylerank
