#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "har/stats.hpp"

namespace har {

enum class Sensor { Acc, Gyro };
enum class Domain { Time, Freq };
enum class Axis { X, Y, Z, XY, YZ, XZ, Resultant };

struct FeatureDescriptor {
    Sensor sensor = Sensor::Acc;
    Domain domain = Domain::Time;
    Statistic statistic = Statistic::Mean;
    Axis axis = Axis::X;
    int bin = -1;  // only for Statistic::Binned

    // "sensor.domain.statistic.axis", e.g. "gyro.time.kurtosis.y" or
    // "acc.time.binned.z_bin3".
    std::string id() const;

    // Throws UsageError on an unknown token.
    static FeatureDescriptor parse(std::string_view id);

    friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

// Whether the statistic/domain/axis combination is part of the catalogue.
bool is_legal(const FeatureDescriptor& d);

class FeatureManifest {
public:
    FeatureManifest() = default;
    // Throws UsageError on an illegal descriptor or a duplicate id.
    explicit FeatureManifest(std::vector<FeatureDescriptor> descriptors);

    // Every catalogue category: per sensor, the time-domain block followed by
    // the frequency-domain block.
    static FeatureManifest default_catalogue();
    static FeatureManifest load(const std::filesystem::path& path);
    static FeatureManifest parse(std::istream& in);

    void write(std::ostream& out) const;

    std::size_t size() const { return descriptors_.size(); }
    const std::vector<FeatureDescriptor>& descriptors() const { return descriptors_; }
    const std::vector<std::string>& ids() const { return ids_; }
    std::optional<std::size_t> index_of(std::string_view id) const;

    // FNV-1a 64 over the newline-joined ids, as 16 hex digits.
    const std::string& content_hash() const { return hash_; }

private:
    std::vector<FeatureDescriptor> descriptors_;
    std::vector<std::string> ids_;
    std::string hash_;
};

}  // namespace har
