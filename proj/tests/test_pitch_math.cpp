#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "stylerank/pitch_math.hpp"
#include "stylerank/rng.hpp"

using namespace stylerank;

namespace {

std::set<int> members(unsigned bits) {
    std::set<int> out;
    for (int i = 0; i < 12; ++i) {
        if (bits >> i & 1U) {
            out.insert(i);
        }
    }
    return out;
}

unsigned bits_of(const std::set<int>& s) {
    unsigned b = 0;
    for (int p : s) {
        b |= 1U << p;
    }
    return b;
}

// Transposition by `t` semitones, acting on the set rather than the bits.
std::set<int> transpose(const std::set<int>& s, int t) {
    std::set<int> out;
    for (int p : s) {
        out.insert(((p + t) % 12 + 12) % 12);
    }
    return out;
}

unsigned min_transposition(unsigned bits) {
    unsigned best = bits;
    for (int t = 0; t < 12; ++t) {
        best = std::min(best, bits_of(transpose(members(bits), t)));
    }
    return best;
}

// Floyd-Warshall over the triadic Tonnetz, independent of the library's BFS.
std::array<std::array<int, 12>, 12> tonnetz_metric() {
    std::array<std::array<int, 12>, 12> d{};
    for (int a = 0; a < 12; ++a) {
        for (int b = 0; b < 12; ++b) {
            const int diff = ((b - a) % 12 + 12) % 12;
            d[a][b] = a == b ? 0 : (diff == 3 || diff == 4 || diff == 5 || diff == 7 || diff == 8 || diff == 9) ? 1 : 99;
        }
    }
    for (int k = 0; k < 12; ++k)
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

int tonnetz_by_permutation(unsigned bits) {
    static const auto d = tonnetz_metric();
    auto s = members(bits);
    std::vector<int> order(s.begin(), s.end());
    int best = 1 << 30;
    do {
        int len = 0;
        for (std::size_t i = 1; i < order.size(); ++i) {
            len += d[order[i - 1]][order[i]];
        }
        best = std::min(best, len);
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

// Just-intonation ratios as (numerator, denominator).
constexpr std::array<std::pair<long, long>, 12> kRatios = {{{1, 1},
                                                            {16, 15},
                                                            {9, 8},
                                                            {6, 5},
                                                            {5, 4},
                                                            {4, 3},
                                                            {17, 12},
                                                            {3, 2},
                                                            {8, 5},
                                                            {5, 3},
                                                            {16, 9},
                                                            {15, 8}}};

long stol_oracle(const std::vector<int>& rel) {
    long l = 1;
    for (int s : rel) {
        const int octave = s >= 0 ? s / 12 : -((-s + 11) / 12);
        const int cls = s - 12 * octave;
        long num = kRatios[cls].first;
        long den = kRatios[cls].second;
        if (octave >= 0) {
            num <<= octave;
        } else {
            den <<= -octave;
        }
        const long g = std::gcd(num, den);
        l = std::lcm(l, den / g);
    }
    return l;
}

} // namespace

TEST_CASE("rot moves bits circularly") {
    CHECK(rot(145, 12, 0) == 145);
    CHECK(rot(145, 12, 8) == 265);
    CHECK(rot(1, 4, 3) == 8);
    CHECK_THROWS_AS(rot(4096, 12, 1), DomainError);
    CHECK_THROWS_AS(rot(1, 12, 12), DomainError);
}

TEST_CASE("rot returns to the start after 12/gcd(i,12) steps") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const auto x = rng.index(4096);
        const auto i = static_cast<unsigned>(rng.index(12));
        const unsigned steps = 12 / std::gcd(i == 0 ? 12U : i, 12U);
        std::uint64_t y = x;
        for (unsigned k = 0; k < steps; ++k) {
            y = rot(y, 12, i);
        }
        CHECK(y == x);
        CHECK(rot(x, 12, i) == bits_of(transpose(members(static_cast<unsigned>(x)), static_cast<int>(i))));
    }
}

TEST_CASE("reduce picks the smallest rotation") {
    CHECK(reduce(145, 12) == 145);
    CHECK(reduce(265, 12) == 145);
    CHECK(reduce(0, 12) == 0);
    CHECK(reduce(0b0110, 4) == 0b0011);
}

TEST_CASE("pcd matches a transposition oracle on every set") {
    std::set<unsigned> image;
    for (unsigned x = 0; x < 4096; ++x) {
        REQUIRE(pcd(x) == min_transposition(x));
        image.insert(pcd(x));
    }
    CHECK(image.size() == 352);
    CHECK(pcd(145) == 145);
    CHECK(pcd(137) == 137);
    for (int k = 0; k < 12; ++k) {
        CHECK(pcd(1U << k) == 1);
    }
}

TEST_CASE("pcd is transposition invariant, idempotent and never grows") {
    for (unsigned x = 0; x < 4096; ++x) {
        const auto p = pcd(x);
        CHECK(pcd(p) == p);
        CHECK(p <= x);
        for (unsigned i = 0; i < 12; ++i) {
            REQUIRE(pcd(rot(x, 12, i)) == p);
        }
    }
}

TEST_CASE("scale signature agrees with brute-force subset tests") {
    const auto major = members(0b1010'1011'0101);
    const auto minor = members(0b1001'1010'1101);
    CHECK(major == std::set<int>{0, 2, 4, 5, 7, 9, 11});
    CHECK(minor == std::set<int>{0, 2, 3, 5, 7, 8, 11});
    for (unsigned x = 0; x < 4096; ++x) {
        const auto s = members(x);
        std::uint32_t expected = 0;
        for (int i = 1; i <= 12; ++i) {
            const auto mj = transpose(major, i);
            const auto mn = transpose(minor, i);
            if (std::includes(mj.begin(), mj.end(), s.begin(), s.end())) {
                expected |= 1U << i;
            }
            if (std::includes(mn.begin(), mn.end(), s.begin(), s.end())) {
                expected |= 1U << (12 + i);
            }
        }
        REQUIRE(scale_signature(static_cast<PitchClassSet>(x)) == expected);
    }
    CHECK(popcount(scale_signature(0)) == 24);
    CHECK(popcount(scale_signature(1)) == 14);
    CHECK(scale_signature(0xFFF) == 0);
    CHECK((scale_signature(0) & 1U) == 0);
}

TEST_CASE("scale signature is antitone in the set") {
    Rng rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto small = static_cast<PitchClassSet>(rng.index(4096));
        const auto big = static_cast<PitchClassSet>(small | rng.index(4096));
        const auto s_small = scale_signature(small);
        const auto s_big = scale_signature(big);
        CHECK((s_big & ~s_small) == 0);
    }
}

TEST_CASE("pc and pcc") {
    CHECK(pc(-5) == 7);
    CHECK(pc(25) == 1);
    CHECK(pcc(6) == 0);
    CHECK(pcc(0) == 6);
    CHECK(pcc(7) == 1);
    CHECK(pcc(-1) == 5);
}

TEST_CASE("popcount") {
    CHECK(popcount(0) == 0);
    CHECK(popcount(145) == 3);
    CHECK(popcount(std::uint64_t{1} << 63) == 1);
}

TEST_CASE("pitch_class_set folds octaves") {
    const std::vector<int> c_major = {60, 64, 67};
    CHECK(pitch_class_set(c_major) == 145);
    const std::vector<int> spread = {36, 52, 79, 60};
    CHECK(pitch_class_set(spread) == 145);
}

TEST_CASE("stol periodicity") {
    CHECK(stol_periodicity(std::vector<int>{0}) == 1);
    CHECK(stol_periodicity(std::vector<int>{0, 7}) == 2);
    CHECK(stol_periodicity(std::vector<int>{0, 12}) == 1);
    CHECK(stol_periodicity(std::vector<int>{0, 4, 7}) == 4);
    Rng rng(9);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<int> rel;
        const auto k = 1 + rng.index(5);
        for (std::uint64_t i = 0; i < k; ++i) {
            rel.push_back(static_cast<int>(rng.index(49)) - 24);
        }
        REQUIRE(static_cast<long>(stol_periodicity(rel)) == stol_oracle(rel));
    }
}

TEST_CASE("dissonance averages over reference pitches") {
    CHECK(dissonance(std::vector<int>{60}, std::vector<int>{60}) == 1.0);
    const std::vector<int> fifth = {60, 67};
    const double expected = (stol_oracle({0, 7}) + stol_oracle({-7, 0})) / 2.0;
    CHECK(dissonance(fifth, fifth) == doctest::Approx(expected));
    CHECK_THROWS_AS(dissonance(fifth, std::vector<int>{}), DomainError);

    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<int> p;
        const auto k = 1 + rng.index(5);
        for (std::uint64_t i = 0; i < k; ++i) {
            p.push_back(48 + static_cast<int>(rng.index(24)));
        }
        std::vector<int> up = p;
        for (int& x : up) {
            x += 12;
        }
        CHECK(dissonance(p, p) == dissonance(up, up));
    }
}

TEST_CASE("tonnetz length") {
    CHECK(tonnetz_length(1) == 0);
    CHECK(tonnetz_length(145) == 2);
    CHECK(tonnetz_length(0b11) == 2);
    CHECK_THROWS_AS(tonnetz_length(0), DomainError);
    CHECK(tonnetz_distance(0, 1) == 2);
    CHECK(tonnetz_distance(0, 7) == 1);
}

TEST_CASE("tonnetz DP matches permutation search up to six classes") {
    for (unsigned x = 1; x < 4096; ++x) {
        if (popcount(x) <= 6) {
            REQUIRE(tonnetz_length(static_cast<PitchClassSet>(x)) == tonnetz_by_permutation(x));
        }
    }
}

TEST_CASE("voice motion codes") {
    using V = std::vector<int>;
    CHECK(voice_motion(V{60, 67}, V{60, 67}) == VoiceMotion::Static);
    CHECK(voice_motion(V{60, 67}, V{62, 69}) == VoiceMotion::Parallel);
    CHECK(voice_motion(V{60, 67}, V{58, 69}) == VoiceMotion::Contrary);
    CHECK(voice_motion(V{60, 67}, V{60, 69}) == VoiceMotion::Oblique);
    CHECK(voice_motion(V{60, 67}, V{61, 70}) == VoiceMotion::Similar);
    CHECK(voice_motion(V{60}, V{55}) == VoiceMotion::Parallel);

    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        V p;
        const auto k = 1 + rng.index(4);
        for (std::uint64_t i = 0; i < k; ++i) {
            p.push_back(40 + static_cast<int>(rng.index(40)));
        }
        CHECK(voice_motion(p, p) == VoiceMotion::Static);
    }
}
