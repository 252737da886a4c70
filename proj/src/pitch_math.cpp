#include "stylerank/pitch_math.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace stylerank {

namespace {

constexpr std::uint64_t low_mask(unsigned width) {
    return width >= 64 ? std::numeric_limits<std::uint64_t>::max()
                       : (std::uint64_t{1} << width) - 1;
}

void check_width(std::uint64_t x, unsigned width) {
    if (width == 0 || width > 64) {
        throw DomainError("bit width must lie in [1, 64], got " + std::to_string(width));
    }
    if ((x & ~low_mask(width)) != 0) {
        throw DomainError("value " + std::to_string(x) + " does not fit in " +
                          std::to_string(width) + " bits");
    }
}

std::uint64_t rot_unchecked(std::uint64_t x, unsigned width, unsigned amount) {
    if (amount == 0) {
        return x;
    }
    return ((x << amount) | (x >> (width - amount))) & low_mask(width);
}

std::uint64_t reduce_unchecked(std::uint64_t x, unsigned width) {
    std::uint64_t best = x;
    for (unsigned i = 1; i < width; ++i) {
        best = std::min(best, rot_unchecked(x, width, i));
    }
    return best;
}

const std::array<PitchClassSet, 4096>& pcd_table() {
    static const auto table = [] {
        std::array<PitchClassSet, 4096> t{};
        for (std::uint64_t x = 0; x < 4096; ++x) {
            t[x] = static_cast<PitchClassSet>(reduce_unchecked(x, 12));
        }
        return t;
    }();
    return table;
}

// Just-intonation approximations of the 12 equal-tempered intervals.
struct Ratio {
    std::uint64_t num;
    std::uint64_t den;
};
constexpr std::array<Ratio, 12> kJustRatios = {{
    {1, 1}, {16, 15}, {9, 8}, {6, 5}, {5, 4}, {4, 3},
    {17, 12}, {3, 2}, {8, 5}, {5, 3}, {16, 9}, {15, 8},
}};

constexpr bool tonnetz_adjacent(int a, int b) {
    switch (pc(b - a)) {
    case 3: case 4: case 5: case 7: case 8: case 9:
        return true;
    default:
        return false;
    }
}

const std::array<std::array<int, 12>, 12>& tonnetz_distances() {
    static const auto dist = [] {
        std::array<std::array<int, 12>, 12> d{};
        for (int src = 0; src < 12; ++src) {
            d[src].fill(-1);
            d[src][src] = 0;
            std::array<int, 12> queue{};
            int head = 0;
            int tail = 0;
            queue[tail++] = src;
            while (head < tail) {
                const int u = queue[head++];
                for (int v = 0; v < 12; ++v) {
                    if (d[src][v] < 0 && tonnetz_adjacent(u, v)) {
                        d[src][v] = d[src][u] + 1;
                        queue[tail++] = v;
                    }
                }
            }
        }
        return d;
    }();
    return dist;
}

// Open Hamiltonian path over the metric closure, subset DP.
int tonnetz_path_dp(PitchClassSet pcs) {
    std::array<int, 12> nodes{};
    int k = 0;
    for (int i = 0; i < 12; ++i) {
        if (pcs & (1u << i)) {
            nodes[k++] = i;
        }
    }
    const auto& dist = tonnetz_distances();
    const int full = (1 << k) - 1;
    constexpr int inf = std::numeric_limits<int>::max() / 2;
    std::vector<int> best(static_cast<std::size_t>(1 << k) * k, inf);
    auto at = [&](int mask, int last) -> int& { return best[static_cast<std::size_t>(mask) * k + last]; };
    for (int i = 0; i < k; ++i) {
        at(1 << i, i) = 0;
    }
    for (int mask = 1; mask <= full; ++mask) {
        for (int last = 0; last < k; ++last) {
            const int cost = at(mask, last);
            if (cost >= inf || !(mask & (1 << last))) {
                continue;
            }
            for (int next = 0; next < k; ++next) {
                if (mask & (1 << next)) {
                    continue;
                }
                int& slot = at(mask | (1 << next), next);
                slot = std::min(slot, cost + dist[nodes[last]][nodes[next]]);
            }
        }
    }
    int result = inf;
    for (int last = 0; last < k; ++last) {
        result = std::min(result, at(full, last));
    }
    return result;
}

const std::array<int, 4096>& tonnetz_table() {
    static const auto table = [] {
        std::array<int, 4096> t{};
        t.fill(-1);
        const auto& classes = pcd_table();
        for (std::size_t x = 1; x < 4096; ++x) {
            const auto rep = classes[x];
            if (t[rep] < 0) {
                t[rep] = tonnetz_path_dp(rep);
            }
            t[x] = t[rep];
        }
        return t;
    }();
    return table;
}

int sign(int v) { return (v > 0) - (v < 0); }

} // namespace

std::uint64_t rot(std::uint64_t x, unsigned width, unsigned amount) {
    check_width(x, width);
    if (amount >= width) {
        throw DomainError("rotation amount " + std::to_string(amount) +
                          " must be below the bit width " + std::to_string(width));
    }
    return rot_unchecked(x, width, amount);
}

std::uint64_t reduce(std::uint64_t x, unsigned width) {
    check_width(x, width);
    if (width == 12) {
        return pcd_table()[x];
    }
    return reduce_unchecked(x, width);
}

PitchClassSet pcd(std::uint64_t x) {
    check_width(x, 12);
    return pcd_table()[x];
}

ScaleSignature scale_signature(PitchClassSet pcs) {
    ScaleSignature sig = 0;
    for (unsigned i = 1; i <= 12; ++i) {
        const auto shift = i % 12;
        const auto major = static_cast<PitchClassSet>(rot_unchecked(kMajorScale, 12, shift));
        const auto minor = static_cast<PitchClassSet>(rot_unchecked(kHarmonicMinorScale, 12, shift));
        if ((pcs & ~major & 0xFFF) == 0) {
            sig |= ScaleSignature{1} << i;
        }
        if ((pcs & ~minor & 0xFFF) == 0) {
            sig |= ScaleSignature{1} << (12 + i);
        }
    }
    return sig;
}

PitchClassSet pitch_class_set(std::span<const int> pitches) noexcept {
    PitchClassSet bits = 0;
    for (int p : pitches) {
        bits |= static_cast<PitchClassSet>(1u << pc(p));
    }
    return bits;
}

std::uint64_t stol_periodicity(std::span<const int> relative_pitches) {
    if (relative_pitches.empty()) {
        throw DomainError("stol_periodicity of an empty set");
    }
    std::uint64_t period = 1;
    for (int s : relative_pitches) {
        const Ratio r = kJustRatios[static_cast<std::size_t>(pc(s))];
        const int octave = (s - pc(s)) / 12;
        std::uint64_t num = r.num;
        std::uint64_t den = r.den;
        if (octave >= 0) {
            num <<= octave;
        } else {
            den <<= -octave;
        }
        den /= std::gcd(num, den);
        period = std::lcm(period, den);
    }
    return period;
}

double dissonance(std::span<const int> pitches, std::span<const int> reference) {
    if (reference.empty() || pitches.empty()) {
        throw DomainError("dissonance requires non-empty pitch sets");
    }
    std::vector<int> shifted(pitches.size());
    double total = 0.0;
    for (int x : reference) {
        std::transform(pitches.begin(), pitches.end(), shifted.begin(),
                       [x](int p) { return p - x; });
        total += static_cast<double>(stol_periodicity(shifted));
    }
    return total / static_cast<double>(reference.size());
}

int tonnetz_length(PitchClassSet pcs) {
    if ((pcs & 0xFFF) == 0) {
        throw DomainError("tonnetz_length of an empty pitch-class set");
    }
    return tonnetz_table()[pcs & 0xFFF];
}

int tonnetz_distance(int from_pc, int to_pc) {
    return tonnetz_distances()[static_cast<std::size_t>(pc(from_pc))][static_cast<std::size_t>(pc(to_pc))];
}

VoiceMotion voice_motion(std::span<const int> from, std::span<const int> to) {
    if (from.empty() || to.empty()) {
        throw DomainError("voice_motion requires non-empty pitch sets");
    }
    const auto [lo1, hi1] = std::minmax_element(from.begin(), from.end());
    const auto [lo2, hi2] = std::minmax_element(to.begin(), to.end());
    const int d_low = *lo2 - *lo1;
    const int d_high = *hi2 - *hi1;
    const int s_low = sign(d_low);
    const int s_high = sign(d_high);
    if (s_low == 0 && s_high == 0) {
        return VoiceMotion::Static;
    }
    if (s_low == 0 || s_high == 0) {
        return VoiceMotion::Oblique;
    }
    if (s_low != s_high) {
        return VoiceMotion::Contrary;
    }
    return d_low == d_high ? VoiceMotion::Parallel : VoiceMotion::Similar;
}

} // namespace stylerank
