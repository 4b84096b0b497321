#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "har/activity.hpp"
#include "har/ingest.hpp"

namespace har {

inline constexpr std::size_t kChannels = 6;
inline constexpr std::size_t kDefaultWindowLen = 256;

// Channel order: acc x/y/z, gyro x/y/z.
enum Channel : std::size_t { AccX = 0, AccY, AccZ, GyrX, GyrY, GyrZ };

struct Window {
    std::string user_id;
    int day = 1;
    Activity label = Activity::Normal;
    std::size_t start_index = 0;
    double rate_hz = 0.0;
    std::array<std::vector<double>, kChannels> data;

    std::size_t length() const { return data[0].size(); }
};

// floor(N / window_len) disjoint windows; the trailing partial window is dropped.
std::vector<Window> segment(const SensorSeries& series, std::size_t window_len = kDefaultWindowLen);

}  // namespace har
