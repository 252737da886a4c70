#include <doctest.h>

#include <algorithm>
#include <set>

#include "smf_writer.hpp"
#include "stylerank/midi.hpp"
#include "stylerank/rng.hpp"

using namespace stylerank;
using smf::Bytes;

namespace {

Bytes single_track(const Bytes& events, int division = 480) {
    Bytes out = smf::header(0, 1, division);
    const Bytes t = smf::track_chunk(events);
    out.insert(out.end(), t.begin(), t.end());
    return out;
}

std::vector<Note> random_notes(Rng& rng, std::size_t count, int span) {
    std::vector<Note> notes;
    for (std::size_t i = 0; i < count; ++i) {
        notes.push_back({static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(span))),
                         1 + static_cast<std::int64_t>(rng.index(40)), 48 + static_cast<int>(rng.index(25)), 0, 0});
    }
    return notes;
}

} // namespace

TEST_CASE("single note at the canonical resolution") {
    const Bytes bytes = single_track({0x00, 0x90, 60, 100, 0x83, 0x60, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00});
    const auto notes = parse_midi(bytes);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0] == Note{0, 480, 60, 0, 0});
}

TEST_CASE("resolution is rescaled to 480") {
    const Bytes bytes = single_track({0x00, 0x90, 60, 100, 0x60, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00}, 96);
    const auto notes = parse_midi(bytes);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0] == Note{0, 480, 60, 0, 0});

    ParseOptions coarse;
    coarse.resolution = 24;
    CHECK(parse_midi(bytes, coarse)[0].duration == 24);
}

TEST_CASE("odd tick counts round to the nearest canonical tick") {
    // At PPQ 1000, tick 1 is 0.48 canonical ticks and tick 8 is 3.84.
    const Bytes bytes = single_track(
        {0x01, 0x90, 60, 100, 0x07, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00}, 1000);
    const auto notes = parse_midi(bytes);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].onset == 0);
    CHECK(notes[0].duration == 4);
}

TEST_CASE("two tracks merge into one onset-ordered list") {
    Bytes bytes = smf::header(1, 2, 480);
    const Bytes t0 = smf::track_chunk({0x81, 0x70, 0x90, 64, 90, 0x83, 0x60, 0x80, 64, 0, 0x00, 0xFF, 0x2F, 0x00});
    const Bytes t1 = smf::track_chunk({0x00, 0x91, 48, 90, 0x81, 0x70, 0x81, 48, 0, 0x00, 0xFF, 0x2F, 0x00});
    bytes.insert(bytes.end(), t0.begin(), t0.end());
    bytes.insert(bytes.end(), t1.begin(), t1.end());
    const auto notes = parse_midi(bytes);
    REQUIRE(notes.size() == 2);
    CHECK(notes[0] == Note{0, 240, 48, 1, 1});
    CHECK(notes[1] == Note{240, 480, 64, 0, 0});
}

TEST_CASE("running status and velocity-zero note-offs") {
    // 0x90 once, then data-only events; velocity 0 ends each note.
    const Bytes bytes =
        single_track({0x00, 0x90, 60, 100, 0x00, 64, 100, 0x83, 0x60, 60, 0, 0x00, 64, 0, 0x00, 0xFF, 0x2F, 0x00});
    const auto notes = parse_midi(bytes);
    REQUIRE(notes.size() == 2);
    CHECK(notes[0] == Note{0, 480, 60, 0, 0});
    CHECK(notes[1] == Note{0, 480, 64, 0, 0});
}

TEST_CASE("running status survives non-note channel events but not meta events") {
    // Program change then a note-on via its own status; after a meta event a
    // data byte has no status to reuse.
    const Bytes ok = single_track({0x00, 0xC0, 5, 0x00, 0x90, 60, 100, 0x10, 60, 0, 0x00, 0xFF, 0x2F, 0x00});
    CHECK(parse_midi(ok).size() == 1);

    const Bytes bad = single_track({0x00, 0x90, 60, 100, 0x00, 0xFF, 0x01, 0x01, 'x', 0x10, 60, 0});
    CHECK_THROWS_AS(parse_midi(bad), ParseError);
}

TEST_CASE("repeated note-ons pair first in, first out") {
    const Bytes bytes = single_track(
        {0x00, 0x90, 60, 100, 0x10, 0x90, 60, 100, 0x10, 0x80, 60, 0, 0x10, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00});
    const auto notes = parse_midi(bytes);
    // Pairs (0,32) and (16,48) overlap and merge into one note.
    REQUIRE(notes.size() == 1);
    CHECK(notes[0] == Note{0, 48, 60, 0, 0});
}

TEST_CASE("unmatched note-ons close at end of track") {
    const Bytes bytes = single_track({0x00, 0x90, 60, 100, 0x83, 0x60, 0xFF, 0x2F, 0x00});
    const auto notes = parse_midi(bytes);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].duration == 480);
}

TEST_CASE("zero-length notes are dropped") {
    const Bytes bytes = single_track({0x00, 0x90, 60, 100, 0x00, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00});
    CHECK(parse_midi(bytes).empty());
}

TEST_CASE("unknown chunks are skipped") {
    Bytes bytes = smf::header(0, 1, 480);
    const Bytes junk = {'X', 'F', 'I', 'H', 0, 0, 0, 2, 1, 2};
    bytes.insert(bytes.end(), junk.begin(), junk.end());
    const Bytes t = smf::track_chunk({0x00, 0x90, 60, 100, 0x10, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00});
    bytes.insert(bytes.end(), t.begin(), t.end());
    CHECK(parse_midi(bytes).size() == 1);
}

TEST_CASE("malformed input names the byte offset") {
    SUBCASE("bad magic") {
        Bytes bytes = single_track({0x00, 0xFF, 0x2F, 0x00});
        bytes[0] = 'X';
        try {
            parse_midi(bytes);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.offset() == 0);
            CHECK(std::string(e.what()).find("byte offset 0") != std::string::npos);
        }
    }
    SUBCASE("format 2") {
        Bytes bytes = single_track({0x00, 0xFF, 0x2F, 0x00});
        bytes[9] = 2;
        CHECK_THROWS_AS(parse_midi(bytes), ParseError);
    }
    SUBCASE("truncated track") {
        Bytes bytes = single_track({0x00, 0x90, 60, 100, 0x10, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00});
        bytes.resize(bytes.size() - 6);
        CHECK_THROWS_AS(parse_midi(bytes), ParseError);
    }
    SUBCASE("event runs past the chunk") {
        const Bytes bytes = single_track({0x00, 0x90, 60});
        try {
            parse_midi(bytes);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.offset() == 14 + 8 + 3);
        }
    }
    SUBCASE("variable-length quantity longer than four bytes") {
        const Bytes bytes = single_track({0x81, 0x81, 0x81, 0x81, 0x01, 0x90, 60, 100});
        try {
            parse_midi(bytes);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.offset() == 22);
        }
    }
    SUBCASE("data byte with no running status") {
        CHECK_THROWS_AS(parse_midi(single_track({0x00, 60, 100})), ParseError);
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(parse_midi(Bytes{}), ParseError);
    }
}

TEST_CASE("writer round trip") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto notes = normalize_notes(random_notes(rng, 30, 2000));
        CHECK(parse_midi(smf::file(notes)) == notes);
    }
}

TEST_CASE("overlapping equal pitches merge into their union") {
    const std::vector<Note> notes = {{0, 100, 60, 0, 0}, {50, 100, 60, 1, 0}, {150, 10, 60, 0, 0}};
    const auto merged = normalize_notes(notes);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].onset == 0);
    CHECK(merged[0].duration == 150);
    CHECK(merged[1].onset == 150);
}

TEST_CASE("segmentation of the two-note example") {
    const std::vector<Note> notes = {{0, 2, 60, 0, 0}, {1, 1, 64, 0, 0}};
    const auto chords = segment_chords(notes);
    REQUIRE(chords.size() == 2);
    CHECK(chords[0].notes == std::vector<Note>{notes[0]});
    CHECK(chords[1].notes == notes);
    CHECK(chords[0].duration_ticks == 1);
    CHECK(chords[1].duration_ticks == 1);

    CHECK(is_onset(chords[1], notes[1]) == 1);
    CHECK(is_onset(chords[1], notes[0]) == 0);
    CHECK(is_tie(chords[1], notes[0]) == 1);
    CHECK_THROWS_AS(is_onset(chords[0], notes[1]), DomainError);

    const std::vector<NotePredicate> on_e = {onset_predicate(), pitch_class_predicate(4)};
    const std::vector<NotePredicate> on_c = {onset_predicate(), pitch_class_predicate(0)};
    CHECK(indicator(chords[1], on_e) == 1);
    CHECK(indicator(chords[1], on_c) == 0);
    const std::vector<NotePredicate> always = {[](const ChordEvent&, const Note&) { return true; }};
    CHECK(indicator(chords[0], always) == 1);
    CHECK_THROWS_AS(indicator(chords[0], std::vector<NotePredicate>{}), DomainError);
}

TEST_CASE("segmentation edge cases") {
    CHECK_THROWS_AS(segment_chords(std::vector<Note>{}), DomainError);

    const std::vector<Note> one = {{10, 7, 60, 0, 0}};
    const auto c1 = segment_chords(one);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].duration_ticks == 7);
    CHECK(is_onset(c1[0], one[0]) == 1);

    const std::vector<Note> dyad = {{0, 5, 64, 0, 0}, {0, 5, 60, 0, 0}};
    const auto c2 = segment_chords(dyad);
    REQUIRE(c2.size() == 1);
    CHECK(c2[0].notes.size() == 2);
    CHECK(c2[0].notes[0].pitch == 60);
}

TEST_CASE("segmentation matches the membership predicate on random notes") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto notes = normalize_notes(random_notes(rng, 1 + rng.index(25), 200));
        const auto chords = segment_chords(notes);

        std::set<std::int64_t> onsets;
        std::int64_t latest = 0;
        for (const Note& n : notes) {
            onsets.insert(n.onset);
            latest = std::max(latest, n.end());
        }
        REQUIRE(chords.size() == onsets.size());
        std::size_t t = 0;
        for (auto it = onsets.begin(); it != onsets.end(); ++it, ++t) {
            const ChordEvent& c = chords[t];
            CHECK(c.index == t);
            CHECK(c.onset_time == *it);
            const auto nx = std::next(it);
            CHECK(c.duration_ticks == (nx == onsets.end() ? latest : *nx) - *it);

            std::vector<Note> expected;
            for (const Note& n : notes) {
                if (n.onset <= *it && *it < n.end()) {
                    expected.push_back(n);
                }
            }
            std::sort(expected.begin(), expected.end(),
                      [](const Note& a, const Note& b) { return std::tie(a.pitch, a.onset) < std::tie(b.pitch, b.onset); });
            REQUIRE(c.notes == expected);
            for (const Note& n : c.notes) {
                CHECK(is_onset(c, n) + is_tie(c, n) == 1);
            }
        }

        // Each note occupies a consecutive run of chords.
        for (const Note& n : notes) {
            std::vector<std::size_t> where;
            for (const ChordEvent& c : chords) {
                if (std::find(c.notes.begin(), c.notes.end(), n) != c.notes.end()) {
                    where.push_back(c.index);
                }
            }
            REQUIRE(!where.empty());
            CHECK(where.back() - where.front() + 1 == where.size());
        }
    }
}

TEST_CASE("chord durations tile a gap-free piece") {
    Rng rng(25);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Note> notes;
        std::int64_t t = 0;
        for (int i = 0; i < 20; ++i) {
            const auto d = 1 + static_cast<std::int64_t>(rng.index(50));
            notes.push_back({t, d + static_cast<std::int64_t>(rng.index(20)), 50 + i, 0, 0});
            t += d;
        }
        notes = normalize_notes(notes);
        std::int64_t latest = 0;
        for (const Note& n : notes) {
            latest = std::max(latest, n.end());
        }
        std::int64_t sum = 0;
        for (const auto& c : segment_chords(notes)) {
            sum += c.duration_ticks;
        }
        CHECK(sum == latest - notes.front().onset);
    }
}

TEST_CASE("re-serialized notes segment identically") {
    Rng rng(27);
    for (int trial = 0; trial < 30; ++trial) {
        const auto notes = normalize_notes(random_notes(rng, 20, 1000));
        const auto again = parse_midi(smf::file(notes));
        const auto a = segment_chords(notes);
        const auto b = segment_chords(again);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].notes == b[i].notes);
            CHECK(a[i].duration_ticks == b[i].duration_ticks);
        }
    }
}

TEST_CASE("skyline melody") {
    const std::vector<Note> notes = {{0, 10, 60, 0, 0}, {0, 10, 64, 0, 0}, {0, 20, 67, 0, 0}, {10, 10, 59, 0, 0}};
    const auto chords = segment_chords(notes);
    CHECK(extract_melody(chords).pitches == std::vector<int>{67, 59});

    // A held upper note is a tie and does not count as melody.
    const std::vector<Note> sustained = {{0, 20, 72, 0, 0}, {5, 5, 50, 0, 0}, {10, 5, 52, 0, 0}};
    const auto sc = segment_chords(sustained);
    CHECK(extract_melody(sc).pitches == std::vector<int>{72, 50, 52});

    const std::vector<Note> mono = {{0, 1, 60, 0, 0}, {1, 1, 62, 0, 0}, {2, 1, 58, 0, 0}};
    CHECK(extract_melody(segment_chords(mono)).pitches == std::vector<int>{60, 62, 58});
}

TEST_CASE("percussion can be excluded") {
    const Bytes bytes = single_track(
        {0x00, 0x99, 36, 100, 0x00, 0x90, 60, 100, 0x10, 0x89, 36, 0, 0x00, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00});
    CHECK(parse_midi(bytes).size() == 2);
    ParseOptions opts;
    opts.include_percussion = false;
    const auto notes = parse_midi(bytes, opts);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].pitch == 60);
}

TEST_CASE("note list JSON round trip") {
    Rng rng(29);
    const auto notes = normalize_notes(random_notes(rng, 15, 500));
    const auto doc = notes_to_json(notes);
    CHECK(doc.size() == notes.size());
    CHECK(doc[0].contains("onset"));
    CHECK(notes_from_json(doc) == notes);
}
