#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "har/eval.hpp"
#include "har/synth.hpp"

namespace har {

// Every pipeline parameter in one place. Loaded from a JSON object whose
// keys mirror the field names; unknown keys are rejected. Command-line
// flags are applied on top by the CLI.
struct PipelineConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path manifest;  // empty: built-in catalogue
    std::filesystem::path features = "features.csv";
    std::filesystem::path output_dir = "report";

    std::uint64_t seed = 42;
    int threads = 0;
    std::size_t window_len = 256;
    ScalerMode scaler = ScalerMode::Standardize;
    ForestSpec ranking;
    std::size_t k_selected = 195;
    bool full_variant = true;  // also evaluate the whole manifest
    std::size_t k_folds = 5;
    bool group_by_user = false;
    std::vector<ModelKind> models = {ModelKind::Gbt, ModelKind::Svm, ModelKind::Mlp};
    std::vector<std::string> scenarios = {"bag_normal", "fast_bag_normal", "none"};
    ModelSpecs specs;
    SynthSpec synth;

    static PipelineConfig parse(std::string_view json_text);
    static PipelineConfig load(const std::filesystem::path& path);
    std::string to_json() const;

    // Throws UsageError on out-of-range values or unknown scenario names.
    void validate() const;

    CvOptions cv_options() const;
    std::vector<ScenarioSpec> scenario_specs() const;
};

}  // namespace har
