#pragma once

// Minimal Standard MIDI File writer for fixtures.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include "stylerank/midi.hpp"

namespace smf {

using Bytes = std::vector<std::uint8_t>;

inline void put_vlq(Bytes& out, std::uint32_t v) {
    std::uint8_t buf[5];
    int n = 0;
    buf[n++] = v & 0x7F;
    while ((v >>= 7) != 0) {
        buf[n++] = static_cast<std::uint8_t>(0x80 | (v & 0x7F));
    }
    while (n > 0) {
        out.push_back(buf[--n]);
    }
}

inline void put_u32(Bytes& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) {
        out.push_back(static_cast<std::uint8_t>(v >> s));
    }
}

inline void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline Bytes header(int format, int tracks, int division) {
    Bytes out = {'M', 'T', 'h', 'd'};
    put_u32(out, 6);
    put_u16(out, static_cast<std::uint16_t>(format));
    put_u16(out, static_cast<std::uint16_t>(tracks));
    put_u16(out, static_cast<std::uint16_t>(division));
    return out;
}

/// Wraps raw event bytes (delta times included) as an MTrk chunk.
inline Bytes track_chunk(const Bytes& events) {
    Bytes out = {'M', 'T', 'r', 'k'};
    put_u32(out, static_cast<std::uint32_t>(events.size()));
    out.insert(out.end(), events.begin(), events.end());
    return out;
}

inline const Bytes kEndOfTrack = {0x00, 0xFF, 0x2F, 0x00};

/// Event bytes for notes on one track: note-offs before note-ons at equal
/// times, explicit status bytes, end-of-track appended.
inline Bytes note_events(const std::vector<stylerank::Note>& notes) {
    struct Ev {
        std::int64_t time;
        int kind;  // 0 off, 1 on
        int channel;
        int pitch;
    };
    std::vector<Ev> evs;
    for (const auto& n : notes) {
        evs.push_back({n.onset, 1, n.channel, n.pitch});
        evs.push_back({n.end(), 0, n.channel, n.pitch});
    }
    std::stable_sort(evs.begin(), evs.end(),
                     [](const Ev& a, const Ev& b) { return std::tie(a.time, a.kind) < std::tie(b.time, b.kind); });
    Bytes out;
    std::int64_t now = 0;
    for (const Ev& e : evs) {
        put_vlq(out, static_cast<std::uint32_t>(e.time - now));
        now = e.time;
        out.push_back(static_cast<std::uint8_t>((e.kind ? 0x90 : 0x80) | e.channel));
        out.push_back(static_cast<std::uint8_t>(e.pitch));
        out.push_back(e.kind ? 80 : 0);
    }
    out.insert(out.end(), kEndOfTrack.begin(), kEndOfTrack.end());
    return out;
}

/// Format-0 file holding `notes` at `division` ticks per quarter.
inline Bytes file(const std::vector<stylerank::Note>& notes, int division = 480) {
    Bytes out = header(0, 1, division);
    const Bytes t = track_chunk(note_events(notes));
    out.insert(out.end(), t.begin(), t.end());
    return out;
}

inline void write(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace smf
