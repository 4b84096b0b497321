#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "har/eval.hpp"
#include "har/pca.hpp"

namespace har {

// Pooled predictions and fold layout for every scenario; enough to rebuild
// all metrics without retraining.
std::string results_to_json(const std::vector<ScenarioResult>& results);
std::vector<ScenarioResult> results_from_json(std::string_view text);

struct PcaReport {
    std::vector<std::string> feature_ids;
    PcaSummary summary;
    std::vector<int> labels;  // activity codes, one per projected row
};

// Top-`top` ranked features of the scaled matrix, projected on 3 components.
PcaReport pca_report(const FeatureMatrix& data, const ImportanceRanking& ranking, std::size_t top = 10,
                     ScalerMode scaler = ScalerMode::Standardize);
void write_pca_projection(const PcaReport& pca, const std::filesystem::path& path);

// Writes results.json, metrics.json, confusion.csv, report_per_class.csv,
// importance_top10.csv and, when given, pca_projection.csv.
void write_report_bundle(const std::filesystem::path& dir, const std::vector<ScenarioResult>& results,
                         const std::optional<PcaReport>& pca = std::nullopt);

// Pooled accuracy (%) per scenario row, grouped by feature-set size.
std::string format_grid(const std::vector<ScenarioResult>& results);

// Display name of a (possibly merged) class code under a scenario.
std::string class_name(const ScenarioSpec& scenario, int code);

}  // namespace har
