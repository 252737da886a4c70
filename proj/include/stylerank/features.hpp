#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stylerank/midi.hpp"

namespace stylerank {

enum class Feature : std::uint8_t {
    ChordDissonance,
    ChordDistinctDurationRatio,
    ChordDuration,
    ChordLowestInterval,
    ChordOnset,
    ChordOnsetPCD,
    ChordOnsetRatio,
    ChordOnsetShape,
    ChordOnsetTiePCD,
    ChordOnsetTieReduced,
    ChordPCD,
    ChordPCDWBass,
    ChordPCSizeRatio,
    ChordRange,
    ChordShape,
    ChordSize,
    ChordTonnetz,
    ChordSizeNgram,
    ChordTranBassInterval,
    ChordTranDissonance,
    ChordTranDistance,
    ChordTranOuter,
    ChordTranPCD,
    ChordTranRepeat,
    ChordTranScaleDistance,
    ChordTranScaleUnion,
    ChordTranVoiceMotion,
    MelodyNgram,
    MelodyPCD,
    IntervalClassDist,
    IntervalDist,
};

inline constexpr std::size_t kFeatureCount = 31;

struct FeatureSpec {
    Feature id;
    std::string_view name;
    int arity;          // consecutive chords per evaluation, 0 for melody features
    int melody_window;  // consecutive melody notes per evaluation, 0 for chord features
    bool duration_weighted;
    bool emits_set;
};

const std::array<FeatureSpec, kFeatureCount>& feature_catalog();
const FeatureSpec& feature_spec(Feature id);
/// Throws DomainError for names outside the catalog.
const FeatureSpec& feature_spec(std::string_view name);
std::vector<Feature> all_features();
/// Comma separated feature names; "all" selects the whole catalog.
std::vector<Feature> parse_feature_list(std::string_view list);

/// Weights over 64-bit categories; zero weights are never stored.
struct CategoricalDistribution {
    std::map<std::uint64_t, double> weights;

    void add(std::uint64_t category, double weight) {
        if (weight > 0.0) {
            weights[category] += weight;
        }
    }
    double total() const;
    bool empty() const noexcept { return weights.empty(); }
    friend bool operator==(const CategoricalDistribution&, const CategoricalDistribution&) = default;
};

CategoricalDistribution extract_feature(const FeatureSpec& spec, std::span<const ChordEvent> chords,
                                        const MelodyLine& melody);

/// All requested features of one note list, in the order of `features`.
std::vector<CategoricalDistribution> extract_features(std::span<const Note> notes,
                                                      std::span<const Feature> features);

using FileFeatures = std::vector<CategoricalDistribution>;

/// Per-file extraction across a collection, OpenMP over files.
std::vector<FileFeatures> extract_collection(std::span<const std::vector<Note>> files,
                                             std::span<const Feature> features);
/// Single-threaded reference for extract_collection.
std::vector<FileFeatures> extract_collection_serial(std::span<const std::vector<Note>> files,
                                                    std::span<const Feature> features);

inline constexpr std::size_t kMaxCategories = 1000;

struct CategoryVocabulary {
    Feature feature = Feature::ChordSize;
    std::vector<std::uint64_t> kept;
    std::map<std::uint64_t, std::size_t> document_frequency;
};

/// Keeps the `cap` categories present in the most files, ties broken by the
/// smaller category value.
CategoryVocabulary build_vocabulary(std::span<const CategoricalDistribution> per_file,
                                    Feature feature = Feature::ChordSize, std::size_t cap = kMaxCategories);

/// Frequencies of the kept categories relative to the full distribution mass.
std::vector<double> vectorize(const CategoricalDistribution& dist, const CategoryVocabulary& vocab);

struct FeatureMatrix {
    CategoryVocabulary vocabulary;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;  // 0 = candidate, 1 = corpus
    std::vector<std::size_t> empty_rows;  // rows whose distribution had no mass

    std::size_t dimension() const noexcept { return vocabulary.kept.size(); }
};

FeatureMatrix build_feature_matrix(std::span<const CategoricalDistribution> per_file, std::span<const int> labels,
                                   Feature feature, std::size_t cap = kMaxCategories);

/// {featureName: {"category": weight}} for one file.
nlohmann::json distributions_to_json(std::span<const Feature> features, std::span<const CategoricalDistribution> dists);

void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix);

} // namespace stylerank
