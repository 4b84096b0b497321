#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "har/activity.hpp"

namespace har {

struct RawRecord {
    std::int64_t t_ms = 0;           // milliseconds since session start
    std::array<double, 3> acc{};     // m/s^2
    std::array<double, 3> gyro{};    // rad/s

    friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

struct SessionMeta {
    std::string user_id;
    int day = 1;
    Activity label = Activity::Normal;
};

struct SensorSeries {
    std::string user_id;
    int day = 1;
    Activity label = Activity::Normal;
    std::vector<RawRecord> samples;
    double nominal_rate_hz = 0.0;

    friend bool operator==(const SensorSeries&, const SensorSeries&) = default;
};

// Source column index for each canonical channel.
struct ColumnMap {
    std::size_t t_ms = 0;
    std::size_t acc_x = 1, acc_y = 2, acc_z = 3;
    std::size_t gyr_x = 4, gyr_y = 5, gyr_z = 6;

    static ColumnMap canonical() { return {}; }

    // Resolve columns by header name, in canonical channel order
    // (timestamp, acc x/y/z, gyro x/y/z). Throws DataError on a missing name.
    static ColumnMap from_names(std::span<const std::string> header,
                                std::span<const std::string, 7> names);

    // Throws DataError unless all seven indices are distinct and < width.
    void validate(std::size_t width) const;

    std::array<std::size_t, 7> indices() const {
        return {t_ms, acc_x, acc_y, acc_z, gyr_x, gyr_y, gyr_z};
    }
};

inline constexpr std::string_view kCanonicalHeader = "t_ms,acc_x,acc_y,acc_z,gyr_x,gyr_y,gyr_z";

struct IngestOptions {
    double max_drop_fraction = 0.10;
    double min_rate_hz = 24.0;
    double max_rate_hz = 40.0;
    char delimiter = ',';
};

struct ParseResult {
    SensorSeries series;
    std::size_t dropped = 0;
};

// Rows whose timestamp does not strictly increase, or with unparsable or
// non-finite channel values, are dropped and counted. Dropping more than
// max_drop_fraction of the data rows (or keeping fewer than two) is a
// "corrupt recording". The estimated rate is written to nominal_rate_hz and
// must fall inside [min_rate_hz, max_rate_hz].
ParseResult parse_sensor_csv(const std::filesystem::path& path, const ColumnMap& map,
                             const SessionMeta& meta, const IngestOptions& opts = {});
ParseResult parse_sensor_stream(std::istream& in, const ColumnMap& map,
                                const SessionMeta& meta, const IngestOptions& opts = {});

// (n - 1) / span_seconds; also stored in series.nominal_rate_hz.
double estimate_rate(SensorSeries& series);

// One sensor's timestamped tri-axial track.
struct Track {
    std::vector<std::int64_t> t_ms;
    std::vector<std::array<double, 3>> values;
};

// Linearly interpolates the gyroscope track onto accelerometer timestamps
// inside the overlap of the two tracks.
SensorSeries align_tracks(const Track& acc, const Track& gyro, const SessionMeta& meta);

Track acc_track(const SensorSeries& series);
Track gyro_track(const SensorSeries& series);

// Canonical CSV with shortest round-trip number formatting.
void write_canonical_csv(const SensorSeries& series, std::ostream& out);
void write_canonical_csv(const SensorSeries& series, const std::filesystem::path& path);

}  // namespace har
