#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "stylerank/error.hpp"

namespace stylerank {

/// Ticks per quarter note every parsed file is rescaled to.
inline constexpr int kCanonicalResolution = 480;
inline constexpr int kPercussionChannel = 9;

struct Note {
    std::int64_t onset = 0;
    std::int64_t duration = 1;
    int pitch = 0;
    int channel = 0;
    int track = 0;

    std::int64_t end() const noexcept { return onset + duration; }
    friend bool operator==(const Note&, const Note&) = default;
};

/// One time slice: every note sounding at a distinct onset time.
/// `notes` is sorted by (pitch, onset).
struct ChordEvent {
    std::size_t index = 0;
    std::vector<Note> notes;
    std::int64_t onset_time = 0;
    std::int64_t duration_ticks = 0;
};

struct MelodyLine {
    std::vector<int> pitches;
};

struct ParseOptions {
    int resolution = kCanonicalResolution;
    bool include_percussion = true;
};

/// Decodes a format 0/1 Standard MIDI File into normalized notes ordered by
/// onset. Throws ParseError on malformed input.
std::vector<Note> parse_midi(std::span<const std::uint8_t> bytes, const ParseOptions& options = {});

std::vector<Note> read_midi_file(const std::filesystem::path& path, const ParseOptions& options = {});

/// Drops zero-length notes, merges overlapping notes of equal pitch into
/// their union and sorts by (onset, pitch, duration, channel, track).
std::vector<Note> normalize_notes(std::vector<Note> notes);

std::vector<ChordEvent> segment_chords(std::span<const Note> notes);

/// 1 iff `note` starts at the chord's latest onset. Throws DomainError when
/// the note is not part of the chord.
int is_onset(const ChordEvent& chord, const Note& note);
int is_tie(const ChordEvent& chord, const Note& note);

using NotePredicate = std::function<bool(const ChordEvent&, const Note&)>;

NotePredicate onset_predicate();
NotePredicate tie_predicate();
NotePredicate pitch_class_predicate(int pitch_class);

/// 1 iff some note of the chord satisfies every predicate.
int indicator(const ChordEvent& chord, std::span<const NotePredicate> predicates);

/// Skyline melody: the highest onset pitch of each chord that has onsets.
MelodyLine extract_melody(std::span<const ChordEvent> chords);

nlohmann::json notes_to_json(std::span<const Note> notes);
std::vector<Note> notes_from_json(const nlohmann::json& doc);

} // namespace stylerank
