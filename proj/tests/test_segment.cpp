#include <doctest.h>

#include "har/error.hpp"
#include "har/segment.hpp"

using namespace har;

namespace {

SensorSeries ramp(std::size_t n) {
    SensorSeries s;
    s.user_id = "07";
    s.day = 2;
    s.label = Activity::Fast;
    s.nominal_rate_hz = 25.6;
    for (std::size_t i = 0; i < n; ++i) {
        RawRecord r;
        r.t_ms = static_cast<std::int64_t>(i * 39);
        for (int c = 0; c < 3; ++c) {
            r.acc[c] = static_cast<double>(i) + 0.1 * c;
            r.gyro[c] = -static_cast<double>(i) - 0.1 * c;
        }
        s.samples.push_back(r);
    }
    return s;
}

}  // namespace

TEST_CASE("window counts") {
    CHECK(segment(ramp(7168), 256).size() == 28);
    CHECK(segment(ramp(255), 256).empty());
    const auto w = segment(ramp(512), 256);
    REQUIRE(w.size() == 2);
    CHECK(w[0].start_index == 0);
    CHECK(w[1].start_index == 256);
}

TEST_CASE("per-activity counts at the default length") {
    const std::pair<std::size_t, std::size_t> rows[] = {{7168, 28}, {7424, 29}, {6912, 27}, {1792, 7}, {1536, 6}};
    for (auto [n, expected] : rows) CHECK(segment(ramp(n)).size() == expected);
}

TEST_CASE("windows reconstruct the covered prefix") {
    const auto s = ramp(1000);
    const auto windows = segment(s, 64);
    REQUIRE(windows.size() == 15);
    std::size_t i = 0;
    for (const auto& w : windows) {
        CHECK(w.user_id == "07");
        CHECK(w.day == 2);
        CHECK(w.label == Activity::Fast);
        CHECK(w.length() == 64);
        for (std::size_t k = 0; k < 64; ++k, ++i) {
            for (int c = 0; c < 3; ++c) {
                CHECK(w.data[AccX + c][k] == s.samples[i].acc[c]);
                CHECK(w.data[GyrX + c][k] == s.samples[i].gyro[c]);
            }
        }
    }
    CHECK(i == 960);
}

TEST_CASE("window length below two is rejected") {
    CHECK_THROWS_AS(segment(ramp(10), 1), UsageError);
}
