#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace har {

// Integer codes are part of every on-disk format; do not reorder.
enum class Activity : std::uint8_t {
    Normal = 0,
    Fast = 1,
    WithBag = 2,
    Downstairs = 3,
    Upstairs = 4,
    Sitting = 5,
};

inline constexpr int kActivityCount = 6;

inline constexpr std::array<Activity, kActivityCount> kAllActivities = {
    Activity::Normal,     Activity::Fast,     Activity::WithBag,
    Activity::Downstairs, Activity::Upstairs, Activity::Sitting,
};

constexpr int code(Activity a) { return static_cast<int>(a); }

// Snake-case name used in file names and CSV columns ("normal", "with_bag", ...).
std::string_view activity_name(Activity a);

std::optional<Activity> activity_from_code(int code);

// Accepts the snake-case name, the integer code, or a few common spellings.
std::optional<Activity> parse_activity(std::string_view text);

}  // namespace har
