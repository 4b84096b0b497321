#include "har/activity.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace har {

namespace {
constexpr std::array<std::string_view, kActivityCount> kNames = {
    "normal", "fast", "with_bag", "downstairs", "upstairs", "sitting",
};
}  // namespace

std::string_view activity_name(Activity a) { return kNames[static_cast<std::size_t>(code(a))]; }

std::optional<Activity> activity_from_code(int c) {
    if (c < 0 || c >= kActivityCount) return std::nullopt;
    return static_cast<Activity>(c);
}

std::optional<Activity> parse_activity(std::string_view text) {
    std::string norm;
    norm.reserve(text.size());
    for (char ch : text) {
        if (ch == '-' || ch == ' ' || ch == '/') ch = '_';
        norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    for (int i = 0; i < kActivityCount; ++i) {
        if (norm == kNames[static_cast<std::size_t>(i)]) return static_cast<Activity>(i);
    }
    if (norm == "withbag" || norm == "w_bag" || norm == "bag") return Activity::WithBag;
    if (norm == "walk") return Activity::Normal;

    int value = -1;
    auto [ptr, ec] = std::from_chars(norm.data(), norm.data() + norm.size(), value);
    if (ec == std::errc{} && ptr == norm.data() + norm.size()) return activity_from_code(value);
    return std::nullopt;
}

}  // namespace har
