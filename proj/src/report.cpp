#include "har/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "har/error.hpp"
#include "har/numfmt.hpp"

namespace har {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

json report_json(const ClassificationReport& r) {
    return {{"accuracy", r.accuracy},
            {"weighted_precision", r.weighted_precision},
            {"weighted_recall", r.weighted_recall},
            {"weighted_f1", r.weighted_f1},
            {"total", r.total}};
}

}  // namespace

std::string class_name(const ScenarioSpec& scenario, int c) {
    auto a = activity_from_code(c);
    if (!a) return std::to_string(c);
    std::string name(activity_name(*a));
    for (Activity other : kAllActivities) {
        if (other != *a && scenario.merge_map[code(other)] == *a) name += "+" + std::string(activity_name(other));
    }
    return name;
}

std::string results_to_json(const std::vector<ScenarioResult>& results) {
    json j;
    j["format"] = "har-results";
    j["version"] = 1;
    j["scenarios"] = json::array();
    for (const auto& r : results) {
        json s;
        s["name"] = r.scenario.name;
        s["y_true"] = r.y_true;
        json ranges = json::array();
        for (const auto& [b, e] : r.folds.ranges) ranges.push_back({b, e});
        s["folds"] = ranges;
        s["ranking"] = {{"ids", r.ranking.ids}, {"importance", r.ranking.importance}, {"seed", r.ranking.seed}};
        json variants = json::array();
        for (const auto& v : r.variants) {
            json models = json::array();
            for (const auto& m : v.models) models.push_back({{"name", m.name}, {"predictions", m.predictions}});
            variants.push_back({{"n_features", v.n_features}, {"models", models}});
        }
        s["variants"] = variants;
        j["scenarios"].push_back(s);
    }
    return j.dump();
}

std::vector<ScenarioResult> results_from_json(std::string_view text) {
    std::vector<ScenarioResult> out;
    try {
        const json j = json::parse(text);
        if (j.at("format") != "har-results" || j.at("version") != 1) throw DataError("results: unsupported format");
        for (const auto& s : j.at("scenarios")) {
            ScenarioResult r;
            const auto name = s.at("name").get<std::string>();
            auto spec = find_scenario(name);
            if (!spec) throw DataError("results: unknown scenario '" + name + "'");
            r.scenario = *spec;
            r.y_true = s.at("y_true").get<std::vector<int>>();
            for (const auto& range : s.at("folds")) {
                const auto b = range.at(0).get<std::size_t>(), e = range.at(1).get<std::size_t>();
                if (b > e || e > r.y_true.size()) throw DataError("results: fold range out of bounds");
                r.folds.ranges.emplace_back(b, e);
            }
            r.folds.k = r.folds.ranges.size();
            const auto& rank = s.at("ranking");
            r.ranking.ids = rank.at("ids").get<std::vector<std::string>>();
            r.ranking.importance = rank.at("importance").get<std::vector<double>>();
            r.ranking.seed = rank.at("seed").get<std::uint64_t>();
            if (r.ranking.ids.size() != r.ranking.importance.size()) throw DataError("results: ranking size mismatch");
            r.ranking.order = rank_order(r.ranking.importance);
            for (const auto& v : s.at("variants")) {
                VariantResult vr;
                vr.n_features = v.at("n_features").get<std::size_t>();
                for (const auto& m : v.at("models")) {
                    auto pred = m.at("predictions").get<std::vector<int>>();
                    if (pred.size() != r.y_true.size()) throw DataError("results: prediction length mismatch");
                    vr.models.push_back(summarize_predictions(m.at("name").get<std::string>(), std::move(pred), r.y_true, r.folds));
                }
                r.variants.push_back(std::move(vr));
            }
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("results: ") + e.what());
    }
    return out;
}

PcaReport pca_report(const FeatureMatrix& data, const ImportanceRanking& ranking, std::size_t top, ScalerMode scaler) {
    const auto mask = select_top_k(ranking, top);
    PcaReport rep;
    rep.feature_ids = mask.ids;
    const Matrix scaled = apply_scaler(data.values, fit_scaler(data.values, scaler));
    rep.summary = pca_summary(scaled.select_cols(mask.indices), 3);
    rep.labels = data.label_codes();
    return rep;
}

void write_pca_projection(const PcaReport& pca, const std::filesystem::path& path) {
    auto out = open_out(path);
    const Matrix& proj = pca.summary.projection;
    for (std::size_t c = 0; c < proj.cols(); ++c) out << "pc" << c + 1 << ',';
    out << "label\n";
    std::string line;
    for (std::size_t r = 0; r < proj.rows(); ++r) {
        line.clear();
        for (double v : proj.row(r)) {
            append_double(line, v);
            line += ',';
        }
        line += activity_name(*activity_from_code(pca.labels[r]));
        out << line << '\n';
    }
}

void write_report_bundle(const std::filesystem::path& dir, const std::vector<ScenarioResult>& results,
                         const std::optional<PcaReport>& pca) {
    std::filesystem::create_directories(dir);
    open_out(dir / "results.json") << results_to_json(results) << '\n';

    json metrics;
    metrics["scenarios"] = json::array();
    auto confusion = open_out(dir / "confusion.csv");
    confusion << "scenario,n_features,model,true,pred,count,percent,zero_support\n";
    auto per_class = open_out(dir / "report_per_class.csv");
    per_class << "scenario,n_features,model,class,precision,recall,f1,support\n";
    auto importance = open_out(dir / "importance_top10.csv");
    importance << "scenario,rank,feature_id,importance\n";

    for (const auto& r : results) {
        json s;
        s["name"] = r.scenario.name;
        s["description"] = r.scenario.description;
        s["rows"] = r.y_true.size();
        s["classes"] = LabelEncoding::fit(r.y_true).classes.size();
        s["variants"] = json::array();
        for (const auto& v : r.variants) {
            json vj;
            vj["n_features"] = v.n_features;
            for (const auto& m : v.models) {
                json mj = report_json(m.report);
                mj["pooled_accuracy"] = m.pooled_accuracy;
                mj["mean_fold_accuracy"] = m.mean_fold_accuracy;
                mj["fold_accuracy"] = m.fold_accuracy;
                vj["models"][m.name] = mj;

                const std::string prefix = r.scenario.name + "," + std::to_string(v.n_features) + "," + m.name + ",";
                const auto& cm = m.confusion;
                for (std::size_t i = 0; i < cm.classes.size(); ++i) {
                    for (std::size_t k = 0; k < cm.classes.size(); ++k) {
                        std::string line = prefix + class_name(r.scenario, cm.classes[i]) + "," +
                                           class_name(r.scenario, cm.classes[k]) + ",";
                        append_double(line, cm.counts(i, k));
                        line += ',';
                        append_double(line, cm.percent(i, k));
                        line += cm.zero_support[i] ? ",1" : ",0";
                        confusion << line << '\n';
                    }
                }
                for (const auto& c : m.report.per_class) {
                    std::string line = prefix + class_name(r.scenario, c.label) + ",";
                    append_double(line, c.precision);
                    line += ',';
                    append_double(line, c.recall);
                    line += ',';
                    append_double(line, c.f1);
                    line += "," + std::to_string(c.support);
                    per_class << line << '\n';
                }
            }
            s["variants"].push_back(vj);
        }
        metrics["scenarios"].push_back(s);

        const auto& order = r.ranking.order;
        for (std::size_t i = 0; i < std::min<std::size_t>(10, order.size()); ++i) {
            std::string line = r.scenario.name + "," + std::to_string(i + 1) + "," + r.ranking.ids[order[i]] + ",";
            append_double(line, r.ranking.importance[order[i]]);
            importance << line << '\n';
        }
    }

    if (pca) {
        metrics["pca"] = {{"feature_ids", pca->feature_ids},
                          {"explained_variance_ratio", pca->summary.explained_variance_ratio}};
        write_pca_projection(*pca, dir / "pca_projection.csv");
    }
    open_out(dir / "metrics.json") << metrics.dump(2) << '\n';
}

std::string format_grid(const std::vector<ScenarioResult>& results) {
    if (results.empty()) return {};
    // Column layout comes from the first scenario; all share one configuration.
    const auto& layout = results.front().variants;
    std::size_t name_width = 8;
    for (const auto& r : results) name_width = std::max(name_width, r.scenario.name.size());

    std::ostringstream out;
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    constexpr std::size_t kCell = 8;
    out << pad("", name_width);
    for (const auto& v : layout) out << " | " << pad(std::to_string(v.n_features) + " features", v.models.size() * kCell - 1);
    out << '\n' << pad("scenario", name_width);
    for (const auto& v : layout) {
        out << " |";
        for (const auto& m : v.models) out << ' ' << pad(m.name, kCell - 1);
    }
    out << '\n';
    for (const auto& r : results) {
        out << pad(r.scenario.name, name_width);
        for (const auto& v : r.variants) {
            out << " |";
            for (const auto& m : v.models) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f", 100.0 * m.pooled_accuracy);
                out << ' ' << pad(buf, kCell - 1);
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace har
