#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "har/forest.hpp"
#include "har/matrix.hpp"

namespace har {

enum class ScalerMode { Standardize, UnitNorm };

std::string_view scaler_mode_name(ScalerMode m);
std::optional<ScalerMode> parse_scaler_mode(std::string_view s);

struct ScalerParams {
    ScalerMode mode = ScalerMode::Standardize;
    std::size_t width = 0;
    std::vector<double> mean;  // standardize only
    std::vector<double> std;   // population std; 0 for constant columns
};

// Fit on training rows only. Needs at least two rows.
ScalerParams fit_scaler(const Matrix& train, ScalerMode mode = ScalerMode::Standardize);

// standardize: (x - mean) / std, zero-std columns map to 0.
// unit_norm: each row divided by its Euclidean norm, zero rows unchanged.
Matrix apply_scaler(const Matrix& x, const ScalerParams& params);

struct ImportanceRanking {
    std::vector<std::string> ids;         // manifest order
    std::vector<double> importance;       // manifest order, sums to 1
    std::vector<std::size_t> order;       // manifest indices, descending importance
    std::uint64_t seed = 0;

    std::vector<std::string> ranked_ids() const;
};

// Random-forest (Gini, sqrt(p) features per split, bootstrap, unlimited depth)
// impurity-decrease ranking. Ties keep manifest order. labels are activity codes.
ImportanceRanking rank_features(const Matrix& train, std::span<const int> labels,
                                std::span<const std::string> ids, const ForestSpec& spec,
                                Execution exec = Execution::Parallel);

// Orders ids by descending importance, ties by index.
std::vector<std::size_t> rank_order(std::span<const double> importance);

struct SelectionMask {
    std::vector<std::string> ids;        // ranking order
    std::vector<std::size_t> indices;    // manifest indices, ranking order
    std::size_t k = 0;
};

// First k ranked ids; k is clamped to the manifest length.
SelectionMask select_top_k(const ImportanceRanking& ranking, std::size_t k);

// rank,feature_id,importance
void write_ranking_csv(const ImportanceRanking& ranking, std::ostream& out, std::size_t limit = 0);
void write_ranking_csv(const ImportanceRanking& ranking, const std::filesystem::path& path,
                       std::size_t limit = 0);

// Dense 0..K-1 codes for the labels present, in ascending label order.
struct LabelEncoding {
    std::vector<int> classes;  // original code per dense index
    std::vector<int> encoded;

    static LabelEncoding fit(std::span<const int> labels);
};

}  // namespace har
