#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stylerank/midi.hpp"

namespace stylerank {

inline constexpr std::size_t kSignatureLength = 100;
inline constexpr double kDuplicateThreshold = 0.75;

/// First and last pitches of a piece, notes ordered by (onset, pitch).
struct PitchSignature {
    std::vector<int> head;
    std::vector<int> tail;
};

PitchSignature pitch_signature(std::span<const Note> notes, std::size_t length = kSignatureLength);

/// Unit-cost edit distance.
std::size_t levenshtein(std::span<const int> a, std::span<const int> b);

/// Edit distance over max(|a|, |b|); 0 when both are empty.
double levenshtein_norm(std::span<const int> a, std::span<const int> b);

struct DuplicatePair {
    std::size_t first = 0;
    std::size_t second = 0;
    double head_distance = 0.0;
    double tail_distance = 0.0;
    bool removed = false;  // whether `second` was dropped because of this pair
};

struct DedupResult {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> removed;
    std::vector<DuplicatePair> pairs;  // every pair below the threshold
};

/// A pair is a duplicate when its head or tail distance is below
/// `threshold`; the earlier file of each duplicate pair is kept.
DedupResult dedup(std::span<const PitchSignature> files, double threshold = kDuplicateThreshold);

void write_dedup_csv(std::ostream& out, const DedupResult& result, std::span<const std::string> names);

struct TrialSplit {
    std::vector<std::size_t> corpus;       // indices into style A
    std::vector<std::size_t> candidates_a;  // indices into style A
    std::vector<std::size_t> candidates_b;  // indices into style B
};

/// Shuffles both styles with `seed`; corpus and same-style candidates are
/// disjoint slices of style A.
TrialSplit make_trial_split(std::size_t style_a_size, std::size_t style_b_size, std::size_t n, std::uint64_t seed);

} // namespace stylerank
