#include "har/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "har/error.hpp"

namespace har {

using nlohmann::json;

namespace {

// Walks one JSON object, rejecting any key that no reader claimed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw UsageError("config: '" + label() + "' must be an object");
    }

    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw UsageError("config: unknown key '" + qualified(key) + "'");
        }
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (const json* v = get(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                throw UsageError("config: bad value for '" + qualified(key) + "'");
            }
        }
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string label() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_path(Section& s, const std::string& key, std::filesystem::path& out) {
    std::string v = out.string();
    s.read(key, v);
    out = v;
}

void read_forest(const json& j, ForestSpec& f) {
    Section s(j, "ranking");
    s.read("n_trees", f.n_trees);
    s.read("max_depth", f.max_depth);
    s.read("min_samples_leaf", f.min_samples_leaf);
    s.read("max_features", f.max_features);
    s.read("bootstrap", f.bootstrap);
}

void read_gbt(const json& j, GbtSpec& g) {
    Section s(j, "gbt");
    s.read("n_estimators", g.n_estimators);
    s.read("max_depth", g.max_depth);
    s.read("min_samples_leaf", g.min_samples_leaf);
    s.read("max_features", g.max_features);
    s.read("learning_rate", g.learning_rate);
}

void read_svm(const json& j, SvmSpec& v) {
    Section s(j, "svm");
    s.read("c", v.c);
    s.read("gamma", v.gamma);
    s.read("tolerance", v.tolerance);
    s.read("cache_mb", v.cache_mb);
    std::string prob = v.probability == SvmProbability::Platt ? "platt" : "votes";
    s.read("probability", prob);
    if (prob == "platt") v.probability = SvmProbability::Platt;
    else if (prob == "votes") v.probability = SvmProbability::Votes;
    else throw UsageError("config: svm.probability must be 'platt' or 'votes'");
}

void read_mlp(const json& j, MlpSpec& m) {
    Section s(j, "mlp");
    s.read("epochs", m.epochs);
    s.read("hidden_layers", m.hidden_layers);
    s.read("hidden_nodes", m.hidden_nodes);
    s.read("dropout", m.dropout);
    s.read("learning_rate", m.learning_rate);
    s.read("batch_size", m.batch_size);
    s.read("momentum", m.momentum);
    s.read("init_range", m.init_range);
}

void read_synth(const json& j, SynthSpec& sp) {
    Section s(j, "synth");
    s.read("n_users", sp.n_users);
    s.read("days", sp.days);
    s.read("rate_hz", sp.rate_hz);
    s.read("gravity", sp.gravity);
    s.read("amp_jitter", sp.amp_jitter);
    s.read("freq_jitter", sp.freq_jitter);
    s.read("harmonic_jitter", sp.harmonic_jitter);
    s.read("resolution", sp.resolution);
    if (const json* d = s.get("duration_s")) {
        Section ds(*d, "synth.duration_s");
        for (Activity a : kAllActivities) ds.read(std::string(activity_name(a)), sp.duration_s[code(a)]);
    }
}

}  // namespace

PipelineConfig PipelineConfig::parse(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    PipelineConfig c;
    {
        Section s(j, "");
        if (const json* p = s.get("paths")) {
            Section ps(*p, "paths");
            read_path(ps, "data_dir", c.data_dir);
            read_path(ps, "manifest", c.manifest);
            read_path(ps, "features", c.features);
            read_path(ps, "output_dir", c.output_dir);
        }
        s.read("seed", c.seed);
        s.read("threads", c.threads);
        s.read("window_len", c.window_len);
        std::string scaler(scaler_mode_name(c.scaler));
        s.read("scaler", scaler);
        auto mode = parse_scaler_mode(scaler);
        if (!mode) throw UsageError("config: unknown scaler '" + scaler + "'");
        c.scaler = *mode;
        if (const json* r = s.get("ranking")) read_forest(*r, c.ranking);
        s.read("k_selected", c.k_selected);
        s.read("full_variant", c.full_variant);
        s.read("k_folds", c.k_folds);
        s.read("group_by_user", c.group_by_user);
        if (const json* m = s.get("models")) {
            std::vector<std::string> names;
            try {
                names = m->get<std::vector<std::string>>();
            } catch (const json::exception&) {
                throw UsageError("config: 'models' must be a list of names");
            }
            c.models.clear();
            for (const auto& n : names) {
                auto k = parse_model_kind(n);
                if (!k) throw UsageError("config: unknown model '" + n + "'");
                c.models.push_back(*k);
            }
        }
        s.read("scenarios", c.scenarios);
        if (const json* g = s.get("gbt")) read_gbt(*g, c.specs.gbt);
        if (const json* v = s.get("svm")) read_svm(*v, c.specs.svm);
        if (const json* m = s.get("mlp")) read_mlp(*m, c.specs.mlp);
        if (const json* sy = s.get("synth")) read_synth(*sy, c.synth);
    }
    c.synth.seed = c.seed;
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string PipelineConfig::to_json() const {
    json j;
    j["paths"] = {{"data_dir", data_dir.string()},
                  {"manifest", manifest.string()},
                  {"features", features.string()},
                  {"output_dir", output_dir.string()}};
    j["seed"] = seed;
    j["threads"] = threads;
    j["window_len"] = window_len;
    j["scaler"] = std::string(scaler_mode_name(scaler));
    j["ranking"] = {{"n_trees", ranking.n_trees},
                    {"max_depth", ranking.max_depth},
                    {"min_samples_leaf", ranking.min_samples_leaf},
                    {"max_features", ranking.max_features},
                    {"bootstrap", ranking.bootstrap}};
    j["k_selected"] = k_selected;
    j["full_variant"] = full_variant;
    j["k_folds"] = k_folds;
    j["group_by_user"] = group_by_user;
    json models_j = json::array();
    for (ModelKind k : models) models_j.push_back(std::string(model_kind_name(k)));
    j["models"] = models_j;
    j["scenarios"] = scenarios;
    const auto& g = specs.gbt;
    j["gbt"] = {{"n_estimators", g.n_estimators},
                {"max_depth", g.max_depth},
                {"min_samples_leaf", g.min_samples_leaf},
                {"max_features", g.max_features},
                {"learning_rate", g.learning_rate}};
    const auto& v = specs.svm;
    j["svm"] = {{"c", v.c},
                {"gamma", v.gamma},
                {"tolerance", v.tolerance},
                {"cache_mb", v.cache_mb},
                {"probability", v.probability == SvmProbability::Platt ? "platt" : "votes"}};
    const auto& m = specs.mlp;
    j["mlp"] = {{"epochs", m.epochs},
                {"hidden_layers", m.hidden_layers},
                {"hidden_nodes", m.hidden_nodes},
                {"dropout", m.dropout},
                {"learning_rate", m.learning_rate},
                {"batch_size", m.batch_size},
                {"momentum", m.momentum},
                {"init_range", m.init_range}};
    json durations;
    for (Activity a : kAllActivities) durations[std::string(activity_name(a))] = synth.duration_s[code(a)];
    j["synth"] = {{"n_users", synth.n_users},
                  {"days", synth.days},
                  {"rate_hz", synth.rate_hz},
                  {"gravity", synth.gravity},
                  {"amp_jitter", synth.amp_jitter},
                  {"freq_jitter", synth.freq_jitter},
                  {"harmonic_jitter", synth.harmonic_jitter},
                  {"resolution", synth.resolution},
                  {"duration_s", durations}};
    return j.dump(2);
}

void PipelineConfig::validate() const {
    if (window_len < 2) throw UsageError("config: window_len must be >= 2");
    if (threads < 0) throw UsageError("config: threads must be >= 0");
    if (k_selected < 1) throw UsageError("config: k_selected must be >= 1");
    if (k_folds < 2) throw UsageError("config: k_folds must be >= 2");
    if (models.empty()) throw UsageError("config: at least one model is required");
    if (scenarios.empty()) throw UsageError("config: at least one scenario is required");
    for (const auto& s : scenarios) {
        if (!find_scenario(s)) throw UsageError("config: unknown scenario '" + s + "'");
    }
    if (ranking.n_trees < 1) throw UsageError("config: ranking.n_trees must be >= 1");
    if (ranking.min_samples_leaf < 1) throw UsageError("config: ranking.min_samples_leaf must be >= 1");
    if (ranking.max_features < 0 || ranking.max_features > 1) throw UsageError("config: ranking.max_features must be in [0, 1]");
    const auto& g = specs.gbt;
    if (g.n_estimators < 1 || g.max_depth < 1 || g.min_samples_leaf < 1) throw UsageError("config: gbt sizes must be >= 1");
    if (!(g.max_features > 0 && g.max_features <= 1)) throw UsageError("config: gbt.max_features must be in (0, 1]");
    if (!(g.learning_rate > 0)) throw UsageError("config: gbt.learning_rate must be positive");
    const auto& v = specs.svm;
    if (!(v.c > 0) || v.gamma < 0 || !(v.tolerance > 0) || v.cache_mb < 0) throw UsageError("config: invalid svm parameters");
    const auto& m = specs.mlp;
    if (m.epochs < 1 || m.hidden_nodes < 1 || m.batch_size < 1) throw UsageError("config: mlp sizes must be >= 1");
    if (m.hidden_layers != 1) throw UsageError("config: mlp.hidden_layers must be 1");
    if (m.dropout < 0 || m.dropout >= 1) throw UsageError("config: mlp.dropout must be in [0, 1)");
    if (!(m.learning_rate > 0) || m.momentum < 0 || m.momentum >= 1) throw UsageError("config: invalid mlp optimizer settings");
}

CvOptions PipelineConfig::cv_options() const {
    CvOptions o;
    o.k_folds = k_folds;
    o.feature_sizes = {k_selected};
    if (full_variant) o.feature_sizes.push_back(0);
    o.scaler = scaler;
    o.ranking = ranking;
    o.specs = specs;
    o.models = models;
    o.group_by_user = group_by_user;
    o.seed = seed;
    return o;
}

std::vector<ScenarioSpec> PipelineConfig::scenario_specs() const {
    std::vector<ScenarioSpec> out;
    for (const auto& s : scenarios) {
        auto spec = find_scenario(s);
        if (!spec) throw UsageError("unknown scenario '" + s + "'");
        out.push_back(*spec);
    }
    return out;
}

}  // namespace har
