// har: synth -> extract -> rank / evaluate / pca / report pipeline driver.
#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "har/config.hpp"
#include "har/error.hpp"
#include "har/features.hpp"
#include "har/ingest.hpp"
#include "har/manifest.hpp"
#include "har/numfmt.hpp"
#include "har/parallel.hpp"
#include "har/report.hpp"
#include "har/segment.hpp"
#include "har/synth.hpp"

namespace fs = std::filesystem;
using namespace har;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON pipeline config; flags override it");
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--threads", c.threads, "Worker cap (0 = runtime default); results do not depend on it");
}

PipelineConfig base_config(const Common& c) {
    PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : PipelineConfig::load(c.config);
    if (c.seed) cfg.seed = cfg.synth.seed = *c.seed;
    if (c.threads) cfg.threads = *c.threads;
    return cfg;
}

void finish_config(PipelineConfig& cfg) {
    cfg.validate();
    set_thread_count(cfg.threads);
}

FeatureManifest load_manifest(const PipelineConfig& cfg) {
    return cfg.manifest.empty() ? FeatureManifest::default_catalogue() : FeatureManifest::load(cfg.manifest);
}

FeatureMatrix load_features(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw DataError("feature file not found: " + path.string());
    return read_feature_csv(path);
}

// ---- synth ----

struct SynthArgs {
    Common common;
    std::string out;
    std::optional<int> users, days;
    std::optional<double> rate;
    std::vector<std::string> durations;
};

int run_synth(SynthArgs& a) {
    PipelineConfig cfg = base_config(a.common);
    if (a.users) cfg.synth.n_users = *a.users;
    if (a.days) cfg.synth.days = *a.days;
    if (a.rate) cfg.synth.rate_hz = *a.rate;
    for (const auto& d : a.durations) {
        const auto eq = d.find('=');
        auto act = eq == std::string::npos ? std::nullopt : parse_activity(d.substr(0, eq));
        auto val = eq == std::string::npos ? std::nullopt : parse_double(d.substr(eq + 1));
        if (!act || !val) throw UsageError("--duration expects <activity>=<seconds>, got '" + d + "'");
        cfg.synth.duration_s[code(*act)] = *val;
    }
    if (!a.out.empty()) cfg.data_dir = a.out;
    finish_config(cfg);
    const std::size_t files = write_synthetic_dataset(cfg.synth, cfg.data_dir);
    std::cout << "wrote " << files << " recordings to " << cfg.data_dir.string() << '\n';
    return 0;
}

// ---- extract ----

struct ExtractArgs {
    Common common;
    std::string data, out, manifest, file, user, activity, columns;
    std::optional<std::size_t> window_len;
    int day = 1;
};

struct Session {
    fs::path path;
    SessionMeta meta;
};

// user_<id>/day_<d>/<activity>.csv; anything else in the tree is ignored.
std::vector<Session> discover_sessions(const fs::path& root) {
    if (!fs::is_directory(root)) throw DataError("data directory not found: " + root.string());
    std::vector<Session> out;
    for (const auto& user_dir : fs::directory_iterator(root)) {
        const std::string un = user_dir.path().filename().string();
        if (!user_dir.is_directory() || un.rfind("user_", 0) != 0) continue;
        for (const auto& day_dir : fs::directory_iterator(user_dir.path())) {
            const std::string dn = day_dir.path().filename().string();
            if (!day_dir.is_directory() || dn.rfind("day_", 0) != 0) continue;
            auto day = parse_int<int>(dn.substr(4));
            if (!day) continue;
            for (const auto& f : fs::directory_iterator(day_dir.path())) {
                if (!f.is_regular_file() || f.path().extension() != ".csv") continue;
                auto act = parse_activity(f.path().stem().string());
                if (!act) continue;
                out.push_back({f.path(), {un.substr(5), *day, *act}});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Session& a, const Session& b) {
        return std::tuple(a.meta.user_id, a.meta.day, code(a.meta.label)) <
               std::tuple(b.meta.user_id, b.meta.day, code(b.meta.label));
    });
    return out;
}

ColumnMap column_map_for(const fs::path& path, const std::string& columns) {
    if (columns.empty()) return ColumnMap::canonical();
    std::vector<std::string> names;
    std::stringstream ss(columns);
    for (std::string n; std::getline(ss, n, ',');) names.emplace_back(trim(n));
    if (names.size() != 7) throw UsageError("--columns expects 7 comma-separated names");
    std::ifstream in(path);
    std::string line;
    if (!in || !std::getline(in, line)) throw DataError("cannot read header of " + path.string());
    std::vector<std::string> header;
    std::stringstream hs(line);
    for (std::string h; std::getline(hs, h, ',');) header.emplace_back(trim(h));
    std::span<const std::string, 7> fixed(names.data(), 7);
    return ColumnMap::from_names(header, fixed);
}

int run_extract(ExtractArgs& a) {
    PipelineConfig cfg = base_config(a.common);
    if (!a.data.empty()) cfg.data_dir = a.data;
    if (!a.out.empty()) cfg.features = a.out;
    if (!a.manifest.empty()) cfg.manifest = a.manifest;
    if (a.window_len) cfg.window_len = *a.window_len;
    finish_config(cfg);

    std::vector<Session> sessions;
    if (!a.file.empty()) {
        if (a.user.empty() || a.activity.empty()) throw UsageError("--file requires --user and --activity");
        auto act = parse_activity(a.activity);
        if (!act) throw UsageError("unknown activity '" + a.activity + "'");
        sessions.push_back({a.file, {a.user, a.day, *act}});
    } else {
        sessions = discover_sessions(cfg.data_dir);
    }
    if (sessions.empty()) throw DataError("no recordings found under " + cfg.data_dir.string());

    const FeatureManifest manifest = load_manifest(cfg);
    std::vector<std::vector<Window>> per_session(sessions.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(sessions.size()); ++i) {
        try {
            const auto& s = sessions[static_cast<std::size_t>(i)];
            try {
                auto parsed = parse_sensor_csv(s.path, column_map_for(s.path, a.columns), s.meta);
                per_session[static_cast<std::size_t>(i)] = segment(parsed.series, cfg.window_len);
            } catch (const DataError& e) {
                throw DataError(s.path.string() + ": " + e.what());
            }
        } catch (...) {
#pragma omp critical(har_cli_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<Window> windows;
    for (auto& w : per_session) std::move(w.begin(), w.end(), std::back_inserter(windows));
    if (windows.empty()) throw DataError("recordings are shorter than one window");
    FeatureMatrix fm = extract_matrix(windows, manifest);
    canonicalize(fm);
    if (cfg.features.has_parent_path()) fs::create_directories(cfg.features.parent_path());
    write_feature_csv(fm, cfg.features);
    std::cout << "sessions " << sessions.size() << ", rows " << fm.values.rows() << ", features " << fm.values.cols()
              << ", manifest " << manifest.content_hash() << '\n';
    return 0;
}

// ---- rank ----

struct RankArgs {
    Common common;
    std::string features, out;
    std::size_t top = 0;
};

ImportanceRanking rank_whole(const FeatureMatrix& fm, const PipelineConfig& cfg) {
    const Matrix scaled = apply_scaler(fm.values, fit_scaler(fm.values, cfg.scaler));
    ForestSpec spec = cfg.ranking;
    spec.seed = cfg.seed;
    return rank_features(scaled, fm.label_codes(), fm.feature_ids, spec);
}

int run_rank(RankArgs& a) {
    PipelineConfig cfg = base_config(a.common);
    if (!a.features.empty()) cfg.features = a.features;
    finish_config(cfg);
    const FeatureMatrix fm = load_features(cfg.features);
    const auto ranking = rank_whole(fm, cfg);
    if (a.out.empty()) {
        write_ranking_csv(ranking, std::cout, a.top);
    } else {
        write_ranking_csv(ranking, a.out, a.top);
        std::cout << "ranked " << ranking.ids.size() << " features -> " << a.out << '\n';
    }
    return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
    Common common;
    std::string features, out, models, save_models;
    std::vector<std::string> scenarios;
    std::optional<std::size_t> k_selected, folds;
    bool group_by_user = false, no_full = false;
};

int run_evaluate(EvaluateArgs& a) {
    PipelineConfig cfg = base_config(a.common);
    if (!a.features.empty()) cfg.features = a.features;
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (!a.models.empty()) {
        cfg.models.clear();
        std::stringstream ss(a.models);
        for (std::string m; std::getline(ss, m, ',');) {
            auto k = parse_model_kind(trim(m));
            if (!k) throw UsageError("unknown model '" + m + "'");
            if (std::find(cfg.models.begin(), cfg.models.end(), *k) == cfg.models.end()) cfg.models.push_back(*k);
        }
    }
    if (!a.scenarios.empty()) cfg.scenarios = a.scenarios;
    if (a.k_selected) cfg.k_selected = *a.k_selected;
    if (a.folds) cfg.k_folds = *a.folds;
    if (a.group_by_user) cfg.group_by_user = true;
    if (a.no_full) cfg.full_variant = false;
    finish_config(cfg);

    FeatureMatrix fm = load_features(cfg.features);
    canonicalize(fm);
    CvOptions options = cfg.cv_options();

    std::vector<ScenarioResult> results;
    for (const auto& scenario : cfg.scenario_specs()) {
        if (!a.save_models.empty()) {
            const fs::path dir = fs::path(a.save_models) / scenario.name;
            fs::create_directories(dir);
            options.on_model = [dir](std::size_t fold, std::size_t n_features, ModelKind kind, const Classifier& c) {
                if (auto* mc = dynamic_cast<const ModelClassifier*>(&c)) {
                    mc->model().save(dir / (std::string(model_kind_name(kind)) + "_k" + std::to_string(n_features) +
                                            "_fold" + std::to_string(fold) + ".json"));
                }
            };
        }
        results.push_back(run_cv(fm, scenario, options));
        std::cerr << "evaluated " << scenario.name << '\n';
    }

    const PcaReport pca = pca_report(fm, results.front().ranking, std::min<std::size_t>(10, fm.values.cols()), cfg.scaler);
    write_report_bundle(cfg.output_dir, results, pca);
    // The worker count never changes results, so the bundle does not record it.
    PipelineConfig saved = cfg;
    saved.threads = 0;
    std::ofstream(cfg.output_dir / "config.json", std::ios::binary) << saved.to_json() << '\n';
    std::cout << format_grid(results);
    return 0;
}

// ---- pca ----

struct PcaArgs {
    Common common;
    std::string features, ranking, out;
    std::size_t top = 10;
};

ImportanceRanking read_ranking(const fs::path& path, const std::vector<std::string>& ids) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ranking " + path.string());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
    ImportanceRanking r;
    r.ids = ids;
    r.importance.assign(ids.size(), 0.0);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string rank, id, imp;
        std::getline(ss, rank, ',');
        std::getline(ss, id, ',');
        std::getline(ss, imp, ',');
        auto it = index.find(std::string(trim(id)));
        auto v = parse_double(imp);
        if (it == index.end() || !v) throw DataError("ranking row does not match the feature file: " + line);
        r.importance[it->second] = *v;
    }
    r.order = rank_order(r.importance);
    return r;
}

int run_pca(PcaArgs& a) {
    PipelineConfig cfg = base_config(a.common);
    if (!a.features.empty()) cfg.features = a.features;
    finish_config(cfg);
    FeatureMatrix fm = load_features(cfg.features);
    canonicalize(fm);
    const auto ranking = a.ranking.empty() ? rank_whole(fm, cfg) : read_ranking(a.ranking, fm.feature_ids);
    const PcaReport pca = pca_report(fm, ranking, a.top, cfg.scaler);
    const fs::path out = a.out.empty() ? fs::path("pca_projection.csv") : fs::path(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_pca_projection(pca, out);
    std::cout << "explained variance ratio:";
    for (double r : pca.summary.explained_variance_ratio) std::cout << ' ' << format_double(r);
    std::cout << '\n';
    return 0;
}

// ---- report ----

struct ReportArgs {
    std::string in, out;
};

int run_report(ReportArgs& a) {
    const fs::path path = fs::path(a.in) / "results.json";
    std::ifstream in(path);
    if (!in) throw DataError("no results.json in " + a.in);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto results = results_from_json(ss.str());
    if (!a.out.empty()) write_report_bundle(a.out, results);
    std::cout << format_grid(results);
    for (const auto& r : results) {
        for (const auto& v : r.variants) {
            for (const auto& m : v.models) {
                std::cout << r.scenario.name << " k=" << v.n_features << ' ' << m.name
                          << " pooled=" << format_double(m.pooled_accuracy)
                          << " mean_fold=" << format_double(m.mean_fold_accuracy)
                          << " weighted_f1=" << format_double(m.report.weighted_f1) << '\n';
            }
        }
    }
    return 0;
}

// ---- manifest ----

struct ManifestArgs {
    std::string out;
};

int run_manifest(ManifestArgs& a) {
    const auto m = FeatureManifest::default_catalogue();
    if (a.out.empty()) {
        m.write(std::cout);
    } else {
        std::ofstream out(a.out, std::ios::binary);
        if (!out) throw DataError("cannot write " + a.out);
        m.write(out);
        std::cout << m.size() << " features, hash " << m.content_hash() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human activity recognition pipeline"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate the synthetic gait dataset");
    add_common(c_synth, synth.common);
    c_synth->add_option("--out", synth.out, "Output directory");
    c_synth->add_option("--users", synth.users, "Number of users");
    c_synth->add_option("--days", synth.days, "Days per user");
    c_synth->add_option("--rate", synth.rate, "Sampling rate in Hz");
    c_synth->add_option("--duration", synth.durations, "Per-activity seconds, e.g. normal=280");

    ExtractArgs extract;
    auto* c_extract = app.add_subcommand("extract", "Segment recordings and compute the feature matrix");
    add_common(c_extract, extract.common);
    c_extract->add_option("--data", extract.data, "Dataset directory (user_<id>/day_<d>/<activity>.csv)");
    c_extract->add_option("--file", extract.file, "Single recording instead of a directory");
    c_extract->add_option("--user", extract.user, "User id for --file");
    c_extract->add_option("--day", extract.day, "Day for --file");
    c_extract->add_option("--activity", extract.activity, "Activity for --file");
    c_extract->add_option("--columns", extract.columns, "Header names for t_ms and the six channels, comma-separated");
    c_extract->add_option("--manifest", extract.manifest, "Feature manifest file");
    c_extract->add_option("--window-len", extract.window_len, "Window length in samples");
    c_extract->add_option("--out", extract.out, "Feature CSV to write");

    RankArgs rank;
    auto* c_rank = app.add_subcommand("rank", "Random-forest feature ranking on the whole feature matrix");
    add_common(c_rank, rank.common);
    c_rank->add_option("--features", rank.features, "Feature CSV");
    c_rank->add_option("--out", rank.out, "Ranking CSV (stdout if omitted)");
    c_rank->add_option("--top", rank.top, "Keep only the first N rows");

    EvaluateArgs eval;
    auto* c_eval = app.add_subcommand("evaluate", "Cross-validated evaluation and report bundle");
    add_common(c_eval, eval.common);
    c_eval->add_option("--features", eval.features, "Feature CSV");
    c_eval->add_option("--out", eval.out, "Report bundle directory");
    c_eval->add_option("--models", eval.models, "Comma-separated subset of gbt,svm,mlp");
    c_eval->add_option("--scenario", eval.scenarios, "Scenario name (repeatable): none, bag_normal, fast_bag_normal");
    c_eval->add_option("--k-selected", eval.k_selected, "Top-ranked feature count");
    c_eval->add_option("--folds", eval.folds, "Number of consecutive folds");
    c_eval->add_flag("--group-by-user", eval.group_by_user, "Keep each user inside a single fold");
    c_eval->add_flag("--no-full", eval.no_full, "Skip the full-manifest variant");
    c_eval->add_option("--save-models", eval.save_models, "Directory for trained per-fold models");

    PcaArgs pca;
    auto* c_pca = app.add_subcommand("pca", "Project the top-ranked features on three principal components");
    add_common(c_pca, pca.common);
    c_pca->add_option("--features", pca.features, "Feature CSV");
    c_pca->add_option("--ranking", pca.ranking, "Ranking CSV (computed if omitted)");
    c_pca->add_option("--top", pca.top, "Number of ranked features");
    c_pca->add_option("--out", pca.out, "Projection CSV");

    ReportArgs report;
    auto* c_report = app.add_subcommand("report", "Print the accuracy grid of an evaluation bundle");
    c_report->add_option("--in", report.in, "Bundle directory written by evaluate")->required();
    c_report->add_option("--out", report.out, "Rewrite the bundle tables into this directory");

    ManifestArgs manifest;
    auto* c_manifest = app.add_subcommand("manifest", "Print or write the default feature manifest");
    c_manifest->add_option("--out", manifest.out, "Manifest file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (c_synth->parsed()) return run_synth(synth);
        if (c_extract->parsed()) return run_extract(extract);
        if (c_rank->parsed()) return run_rank(rank);
        if (c_eval->parsed()) return run_evaluate(eval);
        if (c_pca->parsed()) return run_pca(pca);
        if (c_report->parsed()) return run_report(report);
        if (c_manifest->parsed()) return run_manifest(manifest);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
