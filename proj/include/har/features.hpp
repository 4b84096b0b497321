#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "har/manifest.hpp"
#include "har/matrix.hpp"
#include "har/segment.hpp"

namespace har {

struct RowMeta {
    std::string user_id;
    int day = 1;
    Activity label = Activity::Normal;
    std::size_t start_index = 0;

    friend bool operator==(const RowMeta&, const RowMeta&) = default;
};

struct FeatureVector {
    RowMeta meta;
    std::vector<double> values;  // manifest order
};

struct FeatureMatrix {
    std::vector<std::string> feature_ids;
    std::vector<RowMeta> rows;
    Matrix values;

    std::vector<int> label_codes() const;
};

// Time-domain statistics on the raw channels, frequency-domain statistics on
// each channel's one-sided magnitude spectrum.
FeatureVector extract_window(const Window& window, const FeatureManifest& manifest);

// OpenMP over windows; rows come back in window order regardless of thread count.
FeatureMatrix extract_matrix(std::span<const Window> windows, const FeatureManifest& manifest);

// Single-threaded reference for extract_matrix.
FeatureMatrix extract_matrix_serial(std::span<const Window> windows, const FeatureManifest& manifest);

// CSV: user,day,activity,start_index,<feature ids...>
void write_feature_csv(const FeatureMatrix& fm, std::ostream& out);
void write_feature_csv(const FeatureMatrix& fm, const std::filesystem::path& path);
FeatureMatrix read_feature_csv(std::istream& in);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace har
