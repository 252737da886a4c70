#pragma once

#include <bit>
#include <cstdint>
#include <span>

#include "stylerank/error.hpp"

namespace stylerank {

/// 12-bit pitch-class set, bit i set iff pitch class i (C = 0) is present.
using PitchClassSet = std::uint16_t;

/// Bits 1..12 flag the major scales on roots 1..12 (mod 12) that contain a
/// set, bits 13..24 the harmonic-minor scales. Bit 0 is always clear.
using ScaleSignature = std::uint32_t;

inline constexpr PitchClassSet kMajorScale = 0b1010'1011'0101;         // {0,2,4,5,7,9,11}
inline constexpr PitchClassSet kHarmonicMinorScale = 0b1001'1010'1101; // {0,2,3,5,7,8,11}

/// Circular left rotation of the low `width` bits of `x` by `amount`.
std::uint64_t rot(std::uint64_t x, unsigned width, unsigned amount);

/// Smallest value among all `width` rotations of `x`.
std::uint64_t reduce(std::uint64_t x, unsigned width);

/// Transposition-class representative of a pitch-class set (table lookup).
PitchClassSet pcd(std::uint64_t x);

ScaleSignature scale_signature(PitchClassSet pcs);

/// Pitch class with mathematical modulo, so pc(-5) == 7.
constexpr int pc(int x) noexcept {
    const int m = x % 12;
    return m < 0 ? m + 12 : m;
}

/// Interval class distance from the tritone: |pc(x) - 6|.
constexpr int pcc(int x) noexcept {
    const int d = pc(x) - 6;
    return d < 0 ? -d : d;
}

constexpr int popcount(std::uint64_t x) noexcept {
    return std::popcount(x);
}

/// Pitch-class set of a list of MIDI pitches.
PitchClassSet pitch_class_set(std::span<const int> pitches) noexcept;

/// Relative periodicity of a set of semitone offsets: the lcm of the
/// denominators of their just-intonation ratios.
std::uint64_t stol_periodicity(std::span<const int> relative_pitches);

/// Mean over reference pitches x in `reference` of stol({p - x : p in pitches}).
double dissonance(std::span<const int> pitches, std::span<const int> reference);

/// Edge count of the shortest walk on the triadic Tonnetz visiting every
/// pitch class in `pcs`.
int tonnetz_length(PitchClassSet pcs);

/// Shortest-path distance between two pitch classes on the Tonnetz.
int tonnetz_distance(int from_pc, int to_pc);

enum class VoiceMotion : int {
    Static = 0,
    Oblique = 1,
    Contrary = 2,
    Similar = 3,
    Parallel = 4,
};

/// Outer-voice motion between two successive non-empty pitch sets.
VoiceMotion voice_motion(std::span<const int> from, std::span<const int> to);

} // namespace stylerank
