#include "stylerank/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include "stylerank/pitch_math.hpp"

namespace stylerank {

namespace {

using F = Feature;

constexpr std::array<FeatureSpec, kFeatureCount> kCatalog = {{
    {F::ChordDissonance, "ChordDissonance", 1, 0, true, false},
    {F::ChordDistinctDurationRatio, "ChordDistinctDurationRatio", 1, 0, false, false},
    {F::ChordDuration, "ChordDuration", 2, 0, false, false},
    {F::ChordLowestInterval, "ChordLowestInterval", 1, 0, false, false},
    {F::ChordOnset, "ChordOnset", 1, 0, false, false},
    {F::ChordOnsetPCD, "ChordOnsetPCD", 1, 0, true, false},
    {F::ChordOnsetRatio, "ChordOnsetRatio", 1, 0, false, false},
    {F::ChordOnsetShape, "ChordOnsetShape", 1, 0, true, false},
    {F::ChordOnsetTiePCD, "ChordOnsetTiePCD", 1, 0, true, false},
    {F::ChordOnsetTieReduced, "ChordOnsetTieReduced", 1, 0, true, false},
    {F::ChordPCD, "ChordPCD", 1, 0, true, false},
    {F::ChordPCDWBass, "ChordPCDWBass", 1, 0, true, false},
    {F::ChordPCSizeRatio, "ChordPCSizeRatio", 1, 0, false, false},
    {F::ChordRange, "ChordRange", 1, 0, false, false},
    {F::ChordShape, "ChordShape", 1, 0, true, false},
    {F::ChordSize, "ChordSize", 1, 0, false, false},
    {F::ChordTonnetz, "ChordTonnetz", 1, 0, true, false},
    {F::ChordSizeNgram, "ChordSizeNgram", 3, 0, false, false},
    {F::ChordTranBassInterval, "ChordTranBassInterval", 2, 0, false, false},
    {F::ChordTranDissonance, "ChordTranDissonance", 2, 0, false, false},
    {F::ChordTranDistance, "ChordTranDistance", 2, 0, false, false},
    {F::ChordTranOuter, "ChordTranOuter", 2, 0, false, false},
    {F::ChordTranPCD, "ChordTranPCD", 2, 0, false, false},
    {F::ChordTranRepeat, "ChordTranRepeat", 2, 0, false, false},
    {F::ChordTranScaleDistance, "ChordTranScaleDistance", 2, 0, false, false},
    {F::ChordTranScaleUnion, "ChordTranScaleUnion", 2, 0, false, false},
    {F::ChordTranVoiceMotion, "ChordTranVoiceMotion", 2, 0, false, false},
    {F::MelodyNgram, "MelodyNgram", 0, 4, false, false},
    {F::MelodyPCD, "MelodyPCD", 0, 5, false, false},
    {F::IntervalClassDist, "IntervalClassDist", 1, 0, false, true},
    {F::IntervalDist, "IntervalDist", 1, 0, false, true},
}};

// Per-chord quantities shared by the feature formulas.
struct ChordView {
    std::vector<int> pitches;        // distinct, ascending
    std::vector<int> onset_pitches;  // distinct, ascending
    std::vector<int> note_pitches;   // chord note order
    std::vector<int> note_onset;     // isOns per note, chord note order
    std::size_t size = 0;
    std::size_t distinct_durations = 0;
    std::size_t onset_count = 0;
    PitchClassSet pcs = 0;
    PitchClassSet onset_pcs = 0;
    PitchClassSet tie_pcs = 0;
    std::int64_t onset_time = 0;
    std::int64_t duration = 0;

    int low() const { return pitches.front(); }
    int high() const { return pitches.back(); }
    int range() const { return high() - low(); }
};

ChordView make_view(const ChordEvent& chord) {
    ChordView v;
    v.size = chord.notes.size();
    v.onset_time = chord.onset_time;
    v.duration = chord.duration_ticks;
    std::int64_t latest = chord.notes.front().onset;
    for (const Note& n : chord.notes) {
        latest = std::max(latest, n.onset);
    }
    std::set<std::int64_t> durations;
    for (const Note& n : chord.notes) {
        const int ons = n.onset == latest ? 1 : 0;
        v.note_pitches.push_back(n.pitch);
        v.note_onset.push_back(ons);
        v.pitches.push_back(n.pitch);
        durations.insert(n.duration);
        const auto bit = static_cast<PitchClassSet>(1u << pc(n.pitch));
        v.pcs |= bit;
        if (ons) {
            v.onset_pitches.push_back(n.pitch);
            v.onset_pcs |= bit;
            ++v.onset_count;
        } else {
            v.tie_pcs |= bit;
        }
    }
    v.distinct_durations = durations.size();
    for (auto* list : {&v.pitches, &v.onset_pitches}) {
        std::sort(list->begin(), list->end());
        list->erase(std::unique(list->begin(), list->end()), list->end());
    }
    return v;
}

// (1 << a) | 2^b, or nothing when either exponent overflows 64 bits.
bool ratio_category(std::size_t a, std::size_t b, std::uint64_t& out) {
    if (a > 63 || b > 63) {
        return false;
    }
    out = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
    return true;
}

std::uint64_t floor_category(double v) {
    return static_cast<std::uint64_t>(std::floor(v));
}

void add_chord_feature(Feature id, const ChordView& c, CategoricalDistribution& dist, double weight) {
    std::uint64_t cat = 0;
    switch (id) {
    case F::ChordDissonance:
        dist.add(floor_category(dissonance(c.onset_pitches, c.onset_pitches)), weight);
        return;
    case F::ChordDistinctDurationRatio:
        if (ratio_category(c.distinct_durations, c.size, cat)) {
            dist.add(cat, weight);
        }
        return;
    case F::ChordLowestInterval:
        if (c.pitches.size() >= 2) {
            dist.add(static_cast<std::uint64_t>(c.pitches[1] - c.pitches[0]), weight);
        }
        return;
    case F::ChordOnset: {
        if (c.size > 63) {
            return;
        }
        for (std::size_t i = 0; i < c.size; ++i) {
            cat += static_cast<std::uint64_t>(c.note_onset[i]) << i;
        }
        dist.add(cat | (std::uint64_t{1} << c.size), weight);
        return;
    }
    case F::ChordOnsetPCD:
        dist.add(pcd(c.onset_pcs), weight);
        return;
    case F::ChordOnsetRatio:
        if (ratio_category(c.onset_count, c.size, cat)) {
            dist.add(cat, weight);
        }
        return;
    case F::ChordOnsetShape:
        if (c.range() > 63) {
            return;
        }
        for (std::size_t i = 0; i < c.size; ++i) {
            cat += static_cast<std::uint64_t>(c.note_onset[i]) << (c.note_pitches[i] - c.low());
        }
        dist.add(cat, weight);
        return;
    case F::ChordOnsetTiePCD:
        dist.add(std::uint64_t{pcd(c.onset_pcs)} + (std::uint64_t{pcd(c.tie_pcs)} << 12), weight);
        return;
    case F::ChordOnsetTieReduced:
        dist.add(reduce(std::uint64_t{c.onset_pcs} + (std::uint64_t{c.tie_pcs} << 12), 24), weight);
        return;
    case F::ChordPCD:
        dist.add(pcd(c.pcs), weight);
        return;
    case F::ChordPCDWBass:
        dist.add(std::uint64_t{pcd(c.pcs)} + (std::uint64_t{1} << (12 + pc(c.low()))), weight);
        return;
    case F::ChordPCSizeRatio:
        if (ratio_category(static_cast<std::size_t>(popcount(c.pcs)), c.pitches.size(), cat)) {
            dist.add(cat, weight);
        }
        return;
    case F::ChordRange:
        dist.add(static_cast<std::uint64_t>(c.range()), weight);
        return;
    case F::ChordShape:
        if (c.range() > 63) {
            return;
        }
        for (int p : c.pitches) {
            cat += std::uint64_t{1} << (p - c.low());
        }
        dist.add(cat, weight);
        return;
    case F::ChordSize:
        dist.add(c.size, weight);
        return;
    case F::ChordTonnetz:
        dist.add(static_cast<std::uint64_t>(tonnetz_length(c.pcs)), weight);
        return;
    case F::IntervalClassDist:
    case F::IntervalDist: {
        std::set<std::uint64_t> values;
        for (std::size_t j = 0; j < c.pitches.size(); ++j) {
            for (std::size_t i = j + 1; i < c.pitches.size(); ++i) {
                const int diff = c.pitches[i] - c.pitches[j];
                values.insert(static_cast<std::uint64_t>(id == F::IntervalDist ? pc(diff) : pcc(diff)));
            }
        }
        for (auto v : values) {
            dist.add(v, weight);
        }
        return;
    }
    default:
        throw DomainError("not a single-chord feature");
    }
}

void add_transition_feature(Feature id, const ChordView& a, const ChordView& b, CategoricalDistribution& dist) {
    std::uint64_t cat = 0;
    switch (id) {
    case F::ChordDuration:
        cat = static_cast<std::uint64_t>(b.onset_time - a.onset_time);
        break;
    case F::ChordTranBassInterval:
        cat = static_cast<std::uint64_t>(pc(b.low() - a.low()));
        break;
    case F::ChordTranDissonance:
        cat = floor_category(dissonance(a.pitches, b.pitches));
        break;
    case F::ChordTranDistance:
        cat = static_cast<std::uint64_t>(std::abs(b.low() - a.low()) + std::abs(b.high() - a.high()));
        break;
    case F::ChordTranOuter:
        cat = static_cast<std::uint64_t>(pc(a.range())) + (static_cast<std::uint64_t>(pc(b.range())) << 8) +
              (static_cast<std::uint64_t>(pc(a.low() - b.low())) << 16);
        break;
    case F::ChordTranPCD:
        cat = reduce(std::uint64_t{a.pcs} + (std::uint64_t{b.pcs} << 12), 24);
        break;
    case F::ChordTranRepeat:
        cat = (a.onset_count == a.size && a.pitches == b.pitches) ? 1 : 0;
        break;
    case F::ChordTranScaleDistance:
        cat = static_cast<std::uint64_t>(popcount(scale_signature(a.pcs) ^ scale_signature(b.pcs)));
        break;
    case F::ChordTranScaleUnion:
        cat = static_cast<std::uint64_t>(popcount(scale_signature(a.pcs) | scale_signature(b.pcs)));
        break;
    case F::ChordTranVoiceMotion:
        cat = static_cast<std::uint64_t>(voice_motion(a.pitches, b.pitches));
        break;
    default:
        throw DomainError("not a chord-transition feature");
    }
    dist.add(cat, 1.0);
}

std::uint64_t size_byte(std::size_t n) {
    return std::min<std::uint64_t>(n, 255);
}

CategoricalDistribution extract_from_views(const FeatureSpec& spec, std::span<const ChordView> views,
                                           const MelodyLine& melody) {
    CategoricalDistribution dist;
    const std::size_t m = views.size();
    const auto& mel = melody.pitches;

    if (spec.id == F::MelodyNgram) {
        for (std::size_t t = 0; t + 3 < mel.size(); ++t) {
            std::uint64_t cat = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                cat += static_cast<std::uint64_t>(pc(mel[t + i + 1] - mel[t + i])) << (8 * i);
            }
            dist.add(cat, 1.0);
        }
        return dist;
    }
    if (spec.id == F::MelodyPCD) {
        for (std::size_t t = 0; t + 4 < mel.size(); ++t) {
            dist.add(pcd(pitch_class_set(std::span(mel).subspan(t, 5))), 1.0);
        }
        return dist;
    }
    if (spec.id == F::ChordSizeNgram) {
        for (std::size_t t = 0; t + 2 < m; ++t) {
            dist.add(size_byte(views[t].size) + (size_byte(views[t + 1].size) << 8) +
                         (size_byte(views[t + 2].size) << 16),
                     1.0);
        }
        return dist;
    }
    if (spec.arity == 2) {
        for (std::size_t t = 0; t + 1 < m; ++t) {
            add_transition_feature(spec.id, views[t], views[t + 1], dist);
        }
        return dist;
    }
    for (const ChordView& v : views) {
        add_chord_feature(spec.id, v, dist, spec.duration_weighted ? static_cast<double>(v.duration) : 1.0);
    }
    return dist;
}

std::vector<ChordView> make_views(std::span<const ChordEvent> chords) {
    std::vector<ChordView> views;
    views.reserve(chords.size());
    for (const ChordEvent& c : chords) {
        if (c.notes.empty()) {
            throw DomainError("chord without notes");
        }
        views.push_back(make_view(c));
    }
    return views;
}

} // namespace

const std::array<FeatureSpec, kFeatureCount>& feature_catalog() {
    return kCatalog;
}

const FeatureSpec& feature_spec(Feature id) {
    return kCatalog[static_cast<std::size_t>(id)];
}

const FeatureSpec& feature_spec(std::string_view name) {
    for (const FeatureSpec& s : kCatalog) {
        if (s.name == name) {
            return s;
        }
    }
    throw DomainError("unknown feature '" + std::string(name) + "'");
}

std::vector<Feature> all_features() {
    std::vector<Feature> out;
    for (const FeatureSpec& s : kCatalog) {
        out.push_back(s.id);
    }
    return out;
}

std::vector<Feature> parse_feature_list(std::string_view list) {
    std::vector<Feature> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        auto end = list.find(',', start);
        if (end == std::string_view::npos) {
            end = list.size();
        }
        auto name = list.substr(start, end - start);
        while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
        while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
        if (name == "all") {
            return all_features();
        }
        if (!name.empty()) {
            const Feature id = feature_spec(name).id;
            if (std::find(out.begin(), out.end(), id) == out.end()) {
                out.push_back(id);
            }
        }
        start = end + 1;
    }
    return out;
}

double CategoricalDistribution::total() const {
    double sum = 0.0;
    for (const auto& [cat, w] : weights) {
        sum += w;
    }
    return sum;
}

CategoricalDistribution extract_feature(const FeatureSpec& spec, std::span<const ChordEvent> chords,
                                        const MelodyLine& melody) {
    if (chords.empty()) {
        throw DomainError("no chords");
    }
    const auto views = make_views(chords);
    return extract_from_views(spec, views, melody);
}

std::vector<CategoricalDistribution> extract_features(std::span<const Note> notes,
                                                      std::span<const Feature> features) {
    const auto chords = segment_chords(notes);
    const auto melody = extract_melody(chords);
    const auto views = make_views(chords);
    std::vector<CategoricalDistribution> out;
    out.reserve(features.size());
    for (Feature f : features) {
        out.push_back(extract_from_views(feature_spec(f), views, melody));
    }
    return out;
}

std::vector<FileFeatures> extract_collection(std::span<const std::vector<Note>> files,
                                             std::span<const Feature> features) {
    std::vector<FileFeatures> out(files.size());
    const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = extract_features(files[static_cast<std::size_t>(i)], features);
    }
    return out;
}

std::vector<FileFeatures> extract_collection_serial(std::span<const std::vector<Note>> files,
                                                    std::span<const Feature> features) {
    std::vector<FileFeatures> out;
    out.reserve(files.size());
    for (const auto& notes : files) {
        out.push_back(extract_features(notes, features));
    }
    return out;
}

CategoryVocabulary build_vocabulary(std::span<const CategoricalDistribution> per_file, Feature feature,
                                    std::size_t cap) {
    if (per_file.empty()) {
        throw DomainError("build_vocabulary needs at least one distribution");
    }
    CategoryVocabulary vocab;
    vocab.feature = feature;
    for (const auto& dist : per_file) {
        for (const auto& [cat, w] : dist.weights) {
            ++vocab.document_frequency[cat];
        }
    }
    std::vector<std::pair<std::uint64_t, std::size_t>> ranked(vocab.document_frequency.begin(),
                                                              vocab.document_frequency.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::size_t keep = std::min(cap, ranked.size());
    vocab.kept.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        vocab.kept.push_back(ranked[i].first);
    }
    return vocab;
}

std::vector<double> vectorize(const CategoricalDistribution& dist, const CategoryVocabulary& vocab) {
    std::vector<double> row(vocab.kept.size(), 0.0);
    const double total = dist.total();
    if (total <= 0.0) {
        return row;
    }
    for (std::size_t j = 0; j < vocab.kept.size(); ++j) {
        if (auto it = dist.weights.find(vocab.kept[j]); it != dist.weights.end()) {
            row[j] = it->second / total;
        }
    }
    return row;
}

FeatureMatrix build_feature_matrix(std::span<const CategoricalDistribution> per_file, std::span<const int> labels,
                                   Feature feature, std::size_t cap) {
    if (per_file.size() != labels.size()) {
        throw DomainError("one label per file required");
    }
    FeatureMatrix matrix;
    matrix.vocabulary = build_vocabulary(per_file, feature, cap);
    matrix.labels.assign(labels.begin(), labels.end());
    matrix.rows.reserve(per_file.size());
    for (std::size_t i = 0; i < per_file.size(); ++i) {
        if (per_file[i].total() <= 0.0) {
            matrix.empty_rows.push_back(i);
        }
        matrix.rows.push_back(vectorize(per_file[i], matrix.vocabulary));
    }
    return matrix;
}

nlohmann::json distributions_to_json(std::span<const Feature> features,
                                     std::span<const CategoricalDistribution> dists) {
    if (features.size() != dists.size()) {
        throw DomainError("one distribution per feature required");
    }
    nlohmann::json doc = nlohmann::json::object();
    for (std::size_t i = 0; i < features.size(); ++i) {
        nlohmann::json d = nlohmann::json::object();
        for (const auto& [cat, w] : dists[i].weights) {
            d[std::to_string(cat)] = w;
        }
        doc[std::string(feature_spec(features[i]).name)] = std::move(d);
    }
    return doc;
}

void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix) {
    out << "label";
    for (auto cat : matrix.vocabulary.kept) {
        out << ',' << cat;
    }
    out << '\n';
    std::ostringstream cell;
    cell.precision(17);
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        out << matrix.labels[i];
        for (double v : matrix.rows[i]) {
            cell.str({});
            cell << v;
            out << ',' << cell.str();
        }
        out << '\n';
    }
}

} // namespace stylerank
