#include "stylerank/midi.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <tuple>

namespace stylerank {

namespace {

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::size_t begin, std::size_t end)
        : bytes_(bytes), pos_(begin), end_(end) {}

    std::size_t pos() const noexcept { return pos_; }
    bool done() const noexcept { return pos_ >= end_; }

    std::uint8_t u8(const char* what) {
        if (pos_ >= end_) {
            throw ParseError(std::string("truncated track while reading ") + what, pos_);
        }
        return bytes_[pos_++];
    }

    std::uint8_t peek(const char* what) const {
        if (pos_ >= end_) {
            throw ParseError(std::string("truncated track while reading ") + what, pos_);
        }
        return bytes_[pos_];
    }

    std::uint32_t vlq() {
        const std::size_t start = pos_;
        std::uint32_t value = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint8_t b = u8("variable-length quantity");
            value = (value << 7) | (b & 0x7F);
            if ((b & 0x80) == 0) {
                return value;
            }
        }
        throw ParseError("invalid variable-length quantity", start);
    }

    void skip(std::size_t n, const char* what) {
        if (n > end_ - pos_) {
            throw ParseError(std::string("truncated track while skipping ") + what, pos_);
        }
        pos_ += n;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_;
    std::size_t end_;
};

std::uint32_t read_be(std::span<const std::uint8_t> bytes, std::size_t at, int width) {
    std::uint32_t v = 0;
    for (int i = 0; i < width; ++i) {
        v = (v << 8) | bytes[at + static_cast<std::size_t>(i)];
    }
    return v;
}

bool has_tag(std::span<const std::uint8_t> bytes, std::size_t at, const char (&tag)[5]) {
    return std::equal(tag, tag + 4, bytes.begin() + static_cast<std::ptrdiff_t>(at));
}

struct RawNote {
    std::int64_t on;
    std::int64_t off;
    int pitch;
    int channel;
    int track;
};

void parse_track(std::span<const std::uint8_t> bytes, std::size_t begin, std::size_t end, int track,
                 std::vector<RawNote>& out) {
    ByteReader in(bytes, begin, end);
    std::int64_t tick = 0;
    std::uint8_t running = 0;
    // FIFO of open onsets per (channel, pitch).
    std::map<std::pair<int, int>, std::deque<std::int64_t>> open;

    while (!in.done()) {
        tick += in.vlq();
        std::uint8_t status = in.peek("event status");
        if (status & 0x80) {
            in.u8("event status");
        } else {
            if (running == 0) {
                throw ParseError("data byte without running status", in.pos());
            }
            status = running;
        }

        if (status == 0xFF) {
            running = 0;
            const std::uint8_t type = in.u8("meta type");
            const std::uint32_t len = in.vlq();
            in.skip(len, "meta event");
            if (type == 0x2F) {
                break;
            }
            continue;
        }
        if (status == 0xF0 || status == 0xF7) {
            running = 0;
            in.skip(in.vlq(), "sysex event");
            continue;
        }
        if (status >= 0xF0) {
            throw ParseError("unexpected system message in track", in.pos() - 1);
        }

        running = status;
        const int kind = status & 0xF0;
        const int channel = status & 0x0F;
        const bool two_bytes = !(kind == 0xC0 || kind == 0xD0);
        const std::uint8_t d1 = in.u8("event data");
        const std::uint8_t d2 = two_bytes ? in.u8("event data") : 0;
        if ((d1 | d2) & 0x80) {
            throw ParseError("channel event data byte has the high bit set", in.pos() - 1);
        }

        if (kind == 0x90 && d2 > 0) {
            open[{channel, d1}].push_back(tick);
        } else if (kind == 0x80 || kind == 0x90) {
            auto it = open.find({channel, d1});
            if (it != open.end() && !it->second.empty()) {
                out.push_back({it->second.front(), tick, d1, channel, track});
                it->second.pop_front();
            }
        }
    }

    for (auto& [key, onsets] : open) {
        for (std::int64_t on : onsets) {
            out.push_back({on, tick, key.second, key.first, track});
        }
    }
}

std::int64_t rescale(std::int64_t tick, int from, int to) {
    // Nearest integer, halves rounded up; ticks are nonnegative.
    return (2 * tick * to + from) / (2 * static_cast<std::int64_t>(from));
}

} // namespace

std::vector<Note> parse_midi(std::span<const std::uint8_t> bytes, const ParseOptions& options) {
    if (options.resolution <= 0) {
        throw DomainError("resolution must be positive");
    }
    if (bytes.size() < 14 || !has_tag(bytes, 0, "MThd")) {
        throw ParseError("missing MThd header", 0);
    }
    const std::uint32_t header_len = read_be(bytes, 4, 4);
    if (header_len < 6 || 8 + static_cast<std::size_t>(header_len) > bytes.size()) {
        throw ParseError("bad header length " + std::to_string(header_len), 4);
    }
    const auto format = read_be(bytes, 8, 2);
    const auto track_count = read_be(bytes, 10, 2);
    const auto division = read_be(bytes, 12, 2);
    if (format > 1) {
        throw ParseError("unsupported SMF format " + std::to_string(format), 8);
    }
    if (division & 0x8000) {
        throw ParseError("SMPTE time division is not supported", 12);
    }
    if (division == 0) {
        throw ParseError("zero ticks per quarter note", 12);
    }

    std::vector<RawNote> raw;
    std::size_t pos = 8 + header_len;
    int tracks_seen = 0;
    while (tracks_seen < static_cast<int>(track_count)) {
        if (pos + 8 > bytes.size()) {
            throw ParseError("truncated file: expected " + std::to_string(track_count) + " tracks, found " +
                                 std::to_string(tracks_seen),
                             pos);
        }
        const std::uint32_t len = read_be(bytes, pos + 4, 4);
        const std::size_t body = pos + 8;
        if (len > bytes.size() - body) {
            throw ParseError("truncated chunk of declared length " + std::to_string(len), pos + 4);
        }
        if (has_tag(bytes, pos, "MTrk")) {
            parse_track(bytes, body, body + len, tracks_seen, raw);
            ++tracks_seen;
        }
        pos = body + len;
    }

    std::vector<Note> notes;
    notes.reserve(raw.size());
    const int ppq = static_cast<int>(division);
    for (const RawNote& r : raw) {
        if (!options.include_percussion && r.channel == kPercussionChannel) {
            continue;
        }
        const std::int64_t on = rescale(r.on, ppq, options.resolution);
        const std::int64_t off = rescale(r.off, ppq, options.resolution);
        notes.push_back({on, off - on, r.pitch, r.channel, r.track});
    }
    return normalize_notes(std::move(notes));
}

std::vector<Note> read_midi_file(const std::filesystem::path& path, const ParseOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_midi(bytes, options);
}

std::vector<Note> normalize_notes(std::vector<Note> notes) {
    std::erase_if(notes, [](const Note& n) { return n.duration < 1; });
    std::sort(notes.begin(), notes.end(), [](const Note& a, const Note& b) {
        return std::tie(a.pitch, a.onset, a.duration, a.channel, a.track) <
               std::tie(b.pitch, b.onset, b.duration, b.channel, b.track);
    });
    std::vector<Note> merged;
    merged.reserve(notes.size());
    for (const Note& n : notes) {
        if (!merged.empty() && merged.back().pitch == n.pitch && n.onset < merged.back().end()) {
            Note& cur = merged.back();
            cur.duration = std::max(cur.end(), n.end()) - cur.onset;
        } else {
            merged.push_back(n);
        }
    }
    std::sort(merged.begin(), merged.end(), [](const Note& a, const Note& b) {
        return std::tie(a.onset, a.pitch, a.duration, a.channel, a.track) <
               std::tie(b.onset, b.pitch, b.duration, b.channel, b.track);
    });
    return merged;
}

std::vector<ChordEvent> segment_chords(std::span<const Note> notes) {
    if (notes.empty()) {
        throw DomainError("no notes");
    }
    std::vector<Note> sorted(notes.begin(), notes.end());
    for (const Note& n : sorted) {
        if (n.duration < 1 || n.pitch < 0 || n.pitch > 127 || n.onset < 0) {
            throw DomainError("note with invalid onset, duration or pitch");
        }
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Note& a, const Note& b) { return a.onset < b.onset; });

    std::int64_t latest_end = 0;
    for (const Note& n : sorted) {
        latest_end = std::max(latest_end, n.end());
    }

    std::vector<ChordEvent> chords;
    std::vector<Note> active;
    std::size_t next = 0;
    while (next < sorted.size()) {
        const std::int64_t t = sorted[next].onset;
        std::erase_if(active, [t](const Note& n) { return n.end() <= t; });
        while (next < sorted.size() && sorted[next].onset == t) {
            active.push_back(sorted[next++]);
        }
        ChordEvent chord;
        chord.index = chords.size();
        chord.onset_time = t;
        chord.notes = active;
        std::sort(chord.notes.begin(), chord.notes.end(), [](const Note& a, const Note& b) {
            return std::tie(a.pitch, a.onset) < std::tie(b.pitch, b.onset);
        });
        chord.duration_ticks = (next < sorted.size() ? sorted[next].onset : latest_end) - t;
        chords.push_back(std::move(chord));
    }
    return chords;
}

int is_onset(const ChordEvent& chord, const Note& note) {
    if (std::find(chord.notes.begin(), chord.notes.end(), note) == chord.notes.end()) {
        throw DomainError("note is not a member of the chord");
    }
    std::int64_t latest = chord.notes.front().onset;
    for (const Note& n : chord.notes) {
        latest = std::max(latest, n.onset);
    }
    return note.onset < latest ? 0 : 1;
}

int is_tie(const ChordEvent& chord, const Note& note) {
    return 1 - is_onset(chord, note);
}

NotePredicate onset_predicate() {
    return [](const ChordEvent& c, const Note& n) { return is_onset(c, n) == 1; };
}

NotePredicate tie_predicate() {
    return [](const ChordEvent& c, const Note& n) { return is_tie(c, n) == 1; };
}

NotePredicate pitch_class_predicate(int pitch_class) {
    return [pitch_class](const ChordEvent&, const Note& n) { return n.pitch % 12 == pitch_class; };
}

int indicator(const ChordEvent& chord, std::span<const NotePredicate> predicates) {
    if (predicates.empty()) {
        throw DomainError("indicator requires at least one predicate");
    }
    for (const Note& n : chord.notes) {
        const bool all = std::all_of(predicates.begin(), predicates.end(),
                                     [&](const NotePredicate& f) { return f(chord, n); });
        if (all) {
            return 1;
        }
    }
    return 0;
}

MelodyLine extract_melody(std::span<const ChordEvent> chords) {
    MelodyLine line;
    for (const ChordEvent& chord : chords) {
        if (chord.notes.empty()) {
            continue;
        }
        std::int64_t latest = chord.notes.front().onset;
        for (const Note& n : chord.notes) {
            latest = std::max(latest, n.onset);
        }
        int top = -1;
        for (const Note& n : chord.notes) {
            if (n.onset == latest) {
                top = std::max(top, n.pitch);
            }
        }
        if (top >= 0) {
            line.pitches.push_back(top);
        }
    }
    return line;
}

nlohmann::json notes_to_json(std::span<const Note> notes) {
    auto doc = nlohmann::json::array();
    for (const Note& n : notes) {
        doc.push_back({{"onset", n.onset},
                       {"duration", n.duration},
                       {"pitch", n.pitch},
                       {"channel", n.channel},
                       {"track", n.track}});
    }
    return doc;
}

std::vector<Note> notes_from_json(const nlohmann::json& doc) {
    std::vector<Note> notes;
    for (const auto& rec : doc) {
        notes.push_back({rec.at("onset").get<std::int64_t>(), rec.at("duration").get<std::int64_t>(),
                         rec.at("pitch").get<int>(), rec.at("channel").get<int>(), rec.at("track").get<int>()});
    }
    return notes;
}

} // namespace stylerank
