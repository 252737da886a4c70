#include "stylerank/cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "stylerank/corpus.hpp"
#include "stylerank/pipeline.hpp"

namespace fs = std::filesystem;

namespace stylerank::cli {

namespace {

// Raised for anything the user can fix by changing the command line.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Settings {
    std::string features = "all";
    std::uint64_t seed = 0;
    std::size_t trees = 500;
    int max_depth = 5;
    int workers = 0;
    std::string out;
    std::string format = "json";
    std::optional<double> threshold;
    std::vector<double> alphas = {5.0, 0.5, 0.05, 0.005};
    int resolution = kCanonicalResolution;
    bool no_percussion = false;
    std::vector<std::size_t> sizes = {10};
    std::size_t trials = 1000;
    std::size_t random_trials = 10;
    std::string trial_log;

    std::vector<std::string> inputs;

    std::vector<Feature> feature_set;
    StyleRankOptions options() const {
        StyleRankOptions o;
        o.features = feature_set;
        o.forest.tree_count = trees;
        o.forest.max_depth = max_depth;
        o.forest.seed = seed;
        return o;
    }
    ParseOptions parse_options() const { return {resolution, !no_percussion}; }
};

// Files that parsed, with their features; failures already reported.
struct LoadedSet {
    std::string name;
    std::vector<std::string> ids;
    std::vector<std::vector<Note>> notes;
    std::vector<FileFeatures> features;
    std::size_t failures = 0;
};

bool is_midi(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".mid" || ext == ".midi";
}

std::vector<fs::path> midi_paths(const fs::path& where) {
    std::error_code ec;
    if (fs::is_regular_file(where, ec)) {
        return {where};
    }
    if (!fs::is_directory(where, ec)) {
        throw UsageError("not a file or directory: " + where.string());
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(where)) {
        if (entry.is_regular_file() && is_midi(entry.path())) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string set_name(const fs::path& where) {
    fs::path p = where;
    if (!p.has_filename()) {
        p = p.parent_path();
    }
    return p.filename().string();
}

// Parses and extracts every file in parallel; a failing file is reported
// and left out rather than stopping the batch.
LoadedSet load(const std::vector<fs::path>& paths, const Settings& s, bool want_features, std::ostream& err) {
    const auto n = static_cast<std::ptrdiff_t>(paths.size());
    std::vector<std::vector<Note>> notes(paths.size());
    std::vector<FileFeatures> feats(paths.size());
    std::vector<std::string> errors(paths.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            notes[k] = read_midi_file(paths[k], s.parse_options());
            if (notes[k].empty()) {
                throw DomainError("no notes");
            }
            if (want_features) {
                feats[k] = extract_features(notes[k], s.feature_set);
            }
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    LoadedSet set;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        if (!errors[k].empty()) {
            err << paths[k].string() << ": " << errors[k] << '\n';
            ++set.failures;
            continue;
        }
        set.ids.push_back(paths[k].filename().string());
        set.notes.push_back(std::move(notes[k]));
        set.features.push_back(std::move(feats[k]));
    }
    return set;
}

LoadedSet load_dir(const std::string& where, const Settings& s, std::ostream& err, const char* role) {
    const auto paths = midi_paths(where);
    if (paths.empty()) {
        throw UsageError(std::string(role) + " has no MIDI files: " + where);
    }
    LoadedSet set = load(paths, s, true, err);
    set.name = set_name(where);
    if (set.ids.empty()) {
        throw UsageError(std::string(role) + " has no parseable MIDI files: " + where);
    }
    return set;
}

void emit(const std::string& text, const Settings& s, std::ostream& out) {
    if (s.out.empty()) {
        out << text;
        return;
    }
    std::ofstream file(s.out, std::ios::binary);
    if (!file) {
        throw UsageError("cannot write " + s.out);
    }
    file << text;
}

std::string json_text(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

int status(std::size_t failures) { return failures > 0 ? kExitPartial : kExitOk; }

int cmd_extract(const Settings& s, std::ostream& out, std::ostream& err) {
    std::vector<fs::path> paths;
    for (const auto& in : s.inputs) {
        const auto found = midi_paths(in);
        paths.insert(paths.end(), found.begin(), found.end());
    }
    if (!s.out.empty()) {
        fs::create_directories(s.out);
    }
    const LoadedSet set = load(paths, s, true, err);
    for (std::size_t i = 0; i < set.ids.size(); ++i) {
        const std::string text = distributions_to_json(s.feature_set, set.features[i]).dump() + "\n";
        if (s.out.empty()) {
            out << text;
            continue;
        }
        std::ofstream file(fs::path(s.out) / (set.ids[i] + ".json"), std::ios::binary);
        if (!file) {
            err << set.ids[i] << ": cannot write output\n";
            return kExitPartial;
        }
        file << text;
    }
    return status(set.failures);
}

int cmd_rank(const Settings& s, std::ostream& out, std::ostream& err) {
    const LoadedSet corpus = load_dir(s.inputs.at(0), s, err, "corpus");
    const LoadedSet candidates = load_dir(s.inputs.at(1), s, err, "candidate set");
    const ScoreReport report = rank_candidates(corpus.features, candidates.features, candidates.ids, s.options());
    if (s.format == "csv") {
        std::ostringstream text;
        write_report_csv(text, report);
        emit(text.str(), s, out);
    } else {
        emit(json_text(report_to_json(report)), s, out);
    }
    return status(corpus.failures + candidates.failures);
}

ScoreReport read_report(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read report " + path.string());
    }
    if (path.extension() == ".csv") {
        return read_report_csv(in);
    }
    return report_from_json(nlohmann::json::parse(in));
}

int cmd_filter(const Settings& s, std::ostream& out, std::ostream&) {
    if (!s.threshold) {
        throw UsageError("filter needs --threshold");
    }
    const ScoreReport report = read_report(s.inputs.at(0));
    std::vector<std::size_t> kept, discarded;
    for (std::size_t i : report.ranking) {
        (report.global[i] >= *s.threshold ? kept : discarded).push_back(i);
    }
    if (s.format == "csv") {
        std::ostringstream text;
        text << "candidateId,globalScore,kept\n";
        for (std::size_t i : report.ranking) {
            text << report.candidate_ids[i] << ',' << format_double(report.global[i]) << ','
                 << (report.global[i] >= *s.threshold ? "true" : "false") << '\n';
        }
        emit(text.str(), s, out);
        return kExitOk;
    }
    nlohmann::json doc;
    doc["threshold"] = *s.threshold;
    doc["kept"] = nlohmann::json::array();
    doc["discarded"] = nlohmann::json::array();
    for (std::size_t i : kept) {
        doc["kept"].push_back(report.candidate_ids[i]);
    }
    for (std::size_t i : discarded) {
        doc["discarded"].push_back(report.candidate_ids[i]);
    }
    emit(json_text(doc), s, out);
    return kExitOk;
}

int cmd_compare_models(const Settings& s, std::ostream& out, std::ostream& err) {
    if (s.inputs.size() < 3) {
        throw UsageError("compare-models needs a corpus and at least two model directories");
    }
    const LoadedSet corpus = load_dir(s.inputs[0], s, err, "corpus");
    std::size_t failures = corpus.failures;
    std::vector<std::vector<FileFeatures>> models;
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> ids;
    std::map<std::string, int> seen;
    for (std::size_t k = 1; k < s.inputs.size(); ++k) {
        LoadedSet m = load_dir(s.inputs[k], s, err, "model directory");
        failures += m.failures;
        std::string name = m.name;
        if (const int dup = seen[name]++; dup > 0) {
            name += "#" + std::to_string(dup + 1);
        }
        names.push_back(name);
        models.push_back(std::move(m.features));
        ids.push_back(std::move(m.ids));
    }
    const ModelComparison cmp = compare_models(corpus.features, models, names, ids, s.options());
    if (s.format == "csv") {
        std::ostringstream text;
        text << "modelX,modelY,meanX,meanY,pValue\n";
        for (const auto& c : cmp.comparisons) {
            text << cmp.models[c.model_x] << ',' << cmp.models[c.model_y] << ',' << format_double(c.mean_x) << ','
                 << format_double(c.mean_y) << ',' << format_double(c.p_value) << '\n';
        }
        emit(text.str(), s, out);
    } else {
        nlohmann::json doc;
        doc["models"] = nlohmann::json::array();
        for (std::size_t k = 0; k < cmp.models.size(); ++k) {
            doc["models"].push_back({{"name", cmp.models[k]}, {"mean", cmp.means[k]}, {"files", models[k].size()}});
        }
        doc["comparisons"] = nlohmann::json::array();
        for (const auto& c : cmp.comparisons) {
            doc["comparisons"].push_back({{"modelX", cmp.models[c.model_x]},
                                          {"modelY", cmp.models[c.model_y]},
                                          {"meanX", c.mean_x},
                                          {"meanY", c.mean_y},
                                          {"pValue", c.p_value}});
        }
        emit(json_text(doc), s, out);
    }
    return status(failures);
}

int cmd_experiment1(const Settings& s, std::ostream& out, std::ostream& err) {
    if (s.inputs.size() < 2) {
        throw UsageError("experiment1 needs at least two style directories");
    }
    std::vector<std::vector<FileFeatures>> styles;
    std::vector<std::string> names;
    std::size_t failures = 0;
    for (const auto& dir : s.inputs) {
        LoadedSet set = load_dir(dir, s, err, "style directory");
        failures += set.failures;
        names.push_back(set.name);
        styles.push_back(std::move(set.features));
    }
    Experiment1Config config;
    config.sizes = s.sizes;
    config.trials = s.trials;
    config.seed = s.seed;
    config.options = s.options();
    std::vector<Experiment1Row> rows;
    try {
        rows = run_experiment1(styles, config);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    if (!s.trial_log.empty()) {
        std::ofstream log(s.trial_log, std::ios::binary);
        if (!log) {
            throw UsageError("cannot write " + s.trial_log);
        }
        log << "size,styleA,styleB,method,trialIndex,meanX,meanY,p\n";
        for (const auto& row : rows) {
            for (std::size_t m = 0; m < kMethodCount; ++m) {
                for (std::size_t t = 0; t < row.trials[m].size(); ++t) {
                    const TrialOutcome& o = row.trials[m][t];
                    log << row.size << ',' << names[row.style_a] << ',' << names[row.style_b] << ','
                        << method_name(static_cast<Method>(m)) << ',' << t << ',' << format_double(o.mean_x) << ','
                        << format_double(o.mean_y) << ',' << format_double(o.p_value) << '\n';
                }
            }
        }
    }
    if (s.format == "csv") {
        std::ostringstream text;
        text << "size,styleA,styleB,method,mu,sig,fdr,bon\n";
        for (const auto& row : rows) {
            for (std::size_t m = 0; m < kMethodCount; ++m) {
                const TrialSummary& t = row.summary[m];
                text << row.size << ',' << names[row.style_a] << ',' << names[row.style_b] << ','
                     << method_name(static_cast<Method>(m)) << ',' << format_double(t.mu) << ','
                     << format_double(t.sig) << ',' << format_double(t.fdr) << ',' << format_double(t.bon) << '\n';
            }
        }
        emit(text.str(), s, out);
    } else {
        nlohmann::json doc;
        doc["trials"] = s.trials;
        doc["rows"] = nlohmann::json::array();
        for (const auto& row : rows) {
            nlohmann::json methods;
            for (std::size_t m = 0; m < kMethodCount; ++m) {
                const TrialSummary& t = row.summary[m];
                methods[std::string(method_name(static_cast<Method>(m)))] = {
                    {"mu", t.mu}, {"sig", t.sig}, {"fdr", t.fdr}, {"bon", t.bon}};
            }
            doc["rows"].push_back({{"size", row.size},
                                   {"styleA", names[row.style_a]},
                                   {"styleB", names[row.style_b]},
                                   {"methods", std::move(methods)}});
        }
        emit(json_text(doc), s, out);
    }
    return status(failures);
}

std::string stem_of(const std::string& file) { return fs::path(file).stem().string(); }

int cmd_experiment2(const Settings& s, std::ostream& out, std::ostream& err) {
    std::ifstream counts_in(s.inputs.at(2), std::ios::binary);
    if (!counts_in) {
        throw UsageError("cannot read counts file " + s.inputs.at(2));
    }
    JudgmentCounts counts;
    try {
        counts = read_counts_csv(counts_in);
    } catch (const std::exception& e) {
        throw UsageError(std::string("bad counts file: ") + e.what());
    }
    const LoadedSet corpus = load_dir(s.inputs.at(0), s, err, "corpus");
    const LoadedSet generated = load_dir(s.inputs.at(1), s, err, "generated set");
    const ScoreReport report = rank_candidates(corpus.features, generated.features, generated.ids, s.options());

    // A counts row may name a file with or without its extension.
    std::map<std::string, double> scores;
    std::set<std::string> matched_files;
    std::vector<std::string> unmatched;
    for (const auto& [id, c] : counts) {
        bool found = false;
        for (std::size_t g = 0; g < generated.ids.size() && !found; ++g) {
            if (generated.ids[g] == id || stem_of(generated.ids[g]) == id) {
                scores[id] = report.global[g];
                matched_files.insert(generated.ids[g]);
                found = true;
            }
        }
        if (!found) {
            unmatched.push_back(id);
        }
    }
    for (const auto& id : generated.ids) {
        if (!matched_files.contains(id)) {
            unmatched.push_back(id);
        }
    }
    if (!unmatched.empty()) {
        std::string msg = "counts and generated files do not match:";
        for (const auto& id : unmatched) {
            msg += " " + id;
        }
        throw UsageError(msg);
    }
    const Experiment2Result result = run_experiment2(scores, counts, s.alphas, s.random_trials, s.seed);
    if (s.format == "csv") {
        std::ostringstream text;
        text << "method,alpha,accuracy,stderr\n";
        for (const AccuracyRow* row : {&result.stylerank, &result.random}) {
            for (std::size_t a = 0; a < result.alphas.size(); ++a) {
                text << row->method << ',' << format_double(result.alphas[a]) << ',' << optional_csv(row->value[a])
                     << ',' << optional_csv(row->stderr_[a]) << '\n';
            }
        }
        emit(text.str(), s, out);
    } else {
        nlohmann::json doc;
        doc["alphas"] = result.alphas;
        doc["rows"] = nlohmann::json::array();
        for (const AccuracyRow* row : {&result.stylerank, &result.random}) {
            nlohmann::json acc = nlohmann::json::array();
            nlohmann::json se = nlohmann::json::array();
            for (std::size_t a = 0; a < result.alphas.size(); ++a) {
                acc.push_back(optional_json(row->value[a]));
                se.push_back(optional_json(row->stderr_[a]));
            }
            doc["rows"].push_back({{"method", row->method}, {"accuracy", acc}, {"stderr", se}});
        }
        emit(json_text(doc), s, out);
    }
    return status(corpus.failures + generated.failures);
}

int cmd_dedup(const Settings& s, std::ostream& out, std::ostream& err) {
    const double threshold = s.threshold.value_or(kDuplicateThreshold);
    if (threshold < 0.0 || threshold > 1.0) {
        throw UsageError("--threshold must lie in [0, 1] for dedup");
    }
    const LoadedSet set = load(midi_paths(s.inputs.at(0)), s, false, err);
    std::vector<PitchSignature> signatures;
    for (const auto& notes : set.notes) {
        signatures.push_back(pitch_signature(notes));
    }
    const DedupResult result = dedup(signatures, threshold);
    if (s.format == "csv") {
        std::ostringstream text;
        write_dedup_csv(text, result, set.ids);
        emit(text.str(), s, out);
    } else {
        nlohmann::json doc;
        doc["threshold"] = threshold;
        doc["kept"] = nlohmann::json::array();
        doc["removed"] = nlohmann::json::array();
        doc["pairs"] = nlohmann::json::array();
        for (std::size_t i : result.kept) {
            doc["kept"].push_back(set.ids[i]);
        }
        for (std::size_t i : result.removed) {
            doc["removed"].push_back(set.ids[i]);
        }
        for (const auto& p : result.pairs) {
            doc["pairs"].push_back({{"fileA", set.ids[p.first]},
                                    {"fileB", set.ids[p.second]},
                                    {"headDist", p.head_distance},
                                    {"tailDist", p.tail_distance},
                                    {"removed", p.removed}});
        }
        emit(json_text(doc), s, out);
    }
    return status(set.failures);
}

void validate(Settings& s) {
    try {
        s.feature_set = parse_feature_list(s.features);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    if (s.feature_set.empty()) {
        throw UsageError("--features selects no features");
    }
    if (s.trees == 0) {
        throw UsageError("--trees must be positive");
    }
    if (s.max_depth < 1) {
        throw UsageError("--max-depth must be at least 1");
    }
    if (s.resolution < 1) {
        throw UsageError("--resolution must be positive");
    }
    if (s.alphas.empty()) {
        throw UsageError("at least one --alpha is required");
    }
    for (double a : s.alphas) {
        if (!(a > 0.0)) {
            throw UsageError("--alpha values must be positive");
        }
    }
    if (s.trials == 0) {
        throw UsageError("--trials must be positive");
    }
    for (std::size_t n : s.sizes) {
        if (n == 0) {
            throw UsageError("--sizes values must be positive");
        }
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Settings s;
    CLI::App app{"Rank MIDI files by style similarity to a corpus", "stylerank"};
    app.set_config("--config", "", "key = value file supplying option defaults");
    app.option_defaults()->always_capture_default();
    app.add_option("--features", s.features, "Comma-separated feature names, or 'all'");
    app.add_option("--seed", s.seed, "Master random seed");
    app.add_option("--trees", s.trees, "Trees per forest");
    app.add_option("--max-depth", s.max_depth, "Maximum tree depth");
    app.add_option("--workers", s.workers, "Worker threads (0 = all cores)");
    app.add_option("--out", s.out, "Output file (output directory for extract)");
    app.add_option("--format", s.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threshold", s.threshold, "Score threshold (filter) or distance threshold (dedup)");
    app.add_option("--alpha", s.alphas, "Significance level, repeatable")->take_all()->expected(1, -1);
    app.add_option("--resolution", s.resolution, "Ticks per quarter note after rescaling");
    app.add_flag("--no-percussion", s.no_percussion, "Drop notes on the percussion channel");
    app.add_option("--sizes", s.sizes, "Corpus sizes for experiment1")->expected(1, -1);
    app.add_option("--trials", s.trials, "Trials per configuration for experiment1");
    app.add_option("--trial-log", s.trial_log, "CSV of every experiment1 trial outcome");
    app.add_option("--random-trials", s.random_trials, "Random score assignments for experiment2");
    app.require_subcommand(1);
    app.fallthrough();

    using Handler = int (*)(const Settings&, std::ostream&, std::ostream&);
    std::vector<std::pair<CLI::App*, Handler>> commands;
    auto add = [&](const char* name, const char* help, const char* inputs, int count, Handler h) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("inputs", s.inputs, inputs)->required()->expected(count, count < 0 ? -1 : count);
        sub->fallthrough();
        commands.emplace_back(sub, h);
    };
    add("extract", "Write feature distributions for each MIDI file", "MIDI files or directories", -1, cmd_extract);
    add("rank", "Rank candidate files against a corpus", "CORPUS_DIR CANDIDATE_DIR", 2, cmd_rank);
    add("filter", "Split a ranking report at a score threshold", "REPORT", 1, cmd_filter);
    add("compare-models", "Compare generative models against a corpus", "CORPUS_DIR MODEL_DIR...", -1,
        cmd_compare_models);
    add("experiment1", "Style discrimination trials over style directories", "STYLE_DIR...", -1, cmd_experiment1);
    add("experiment2", "Ranking accuracy against listening-test counts", "CORPUS_DIR GENERATED_DIR COUNTS_CSV", 3,
        cmd_experiment2);
    add("dedup", "Report near-duplicate files in a directory", "DIR", 1, cmd_dedup);

    // CLI11 consumes arguments from the back.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        validate(s);
        if (s.workers > 0) {
            omp_set_num_threads(s.workers);
        }
        for (const auto& [sub, handler] : commands) {
            if (sub->parsed()) {
                return handler(s, out, err);
            }
        }
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitPartial;
    }
}

} // namespace stylerank::cli
