// Parallel kernels against their serial references on a synthetic corpus.

#include <benchmark/benchmark.h>

#include "stylerank/pipeline.hpp"
#include "synthetic.hpp"

namespace {

using namespace stylerank;

const std::vector<std::vector<Note>>& pieces() {
    static const auto files = [] {
        auto a = synth::collection(synth::Style::HarmonyCommitted, 11, 30);
        auto b = synth::collection(synth::Style::RhythmCommitted, 12, 30);
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }();
    return files;
}

const FeatureMatrix& pcd_matrix() {
    static const FeatureMatrix m = [] {
        const std::vector<Feature> f = {Feature::ChordPCD};
        const auto feats = extract_collection_serial(pieces(), f);
        std::vector<CategoricalDistribution> d;
        std::vector<int> labels;
        for (std::size_t i = 0; i < feats.size(); ++i) {
            d.push_back(feats[i][0]);
            labels.push_back(i < 30 ? 1 : 0);
        }
        return build_feature_matrix(d, labels, Feature::ChordPCD);
    }();
    return m;
}

void BM_ExtractSerial(benchmark::State& state) {
    const auto f = all_features();
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_collection_serial(pieces(), f));
    }
}

void BM_ExtractParallel(benchmark::State& state) {
    const auto f = all_features();
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_collection(pieces(), f));
    }
}

void BM_ForestSerial(benchmark::State& state) {
    ForestConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_forest_serial(pcd_matrix().rows, pcd_matrix().labels, cfg));
    }
}

void BM_ForestParallel(benchmark::State& state) {
    ForestConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_forest(pcd_matrix().rows, pcd_matrix().labels, cfg));
    }
}

std::vector<FeatureEmbeddings> embeddings() {
    const auto f = all_features();
    const auto feats = extract_collection_serial(pieces(), f);
    const std::span<const FileFeatures> all(feats);
    StyleRankOptions options;
    options.forest.tree_count = 100;
    return embed_features(all.subspan(0, 30), all.subspan(30), options);
}

std::vector<std::string> candidate_ids() {
    std::vector<std::string> ids;
    for (int i = 0; i < 30; ++i) {
        ids.push_back("c" + std::to_string(i));
    }
    return ids;
}

void BM_ScoresSerial(benchmark::State& state) {
    const auto e = embeddings();
    const auto ids = candidate_ids();
    for (auto _ : state) {
        benchmark::DoNotOptimize(per_feature_scores_serial(ids, e));
    }
}

void BM_ScoresParallel(benchmark::State& state) {
    const auto e = embeddings();
    const auto ids = candidate_ids();
    for (auto _ : state) {
        benchmark::DoNotOptimize(per_feature_scores(ids, e));
    }
}

} // namespace

BENCHMARK(BM_ExtractSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExtractParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoresSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoresParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
