#include <doctest.h>

#include <filesystem>
#include <set>

#include "har/error.hpp"
#include "har/fft.hpp"
#include "har/ingest.hpp"
#include "har/segment.hpp"
#include "har/stats.hpp"
#include "har/synth.hpp"

using namespace har;

namespace {

SynthSpec small_spec(int users = 3) {
    SynthSpec s;
    s.n_users = users;
    return s;
}

// Dominant non-DC bin of the first acc-y window.
std::size_t dominant_bin(const SensorSeries& s) {
    const auto w = segment(s).at(0);
    const auto spec = fft_spectrum(w.data[AccY]);
    std::size_t best = 1;
    for (std::size_t k = 2; k < spec.size(); ++k) {
        if (spec[k] > spec[best]) best = k;
    }
    return best;
}

double non_dc_energy(const SensorSeries& s) {
    double total = 0;
    for (const auto& w : segment(s)) {
        for (std::size_t c = 0; c < kChannels; ++c) total += compute_statistic(Statistic::Energy, fft_spectrum(w.data[c]));
    }
    return total;
}

}  // namespace

TEST_CASE("generation is deterministic") {
    const auto a = generate_dataset(small_spec());
    const auto b = generate_dataset(small_spec());
    CHECK(a == b);
    auto other = small_spec();
    other.seed = 43;
    CHECK(generate_dataset(other) != a);
}

TEST_CASE("default durations reproduce the per-user window counts") {
    const SynthSpec spec;
    const std::pair<Activity, std::size_t> expected[] = {{Activity::Normal, 28},  {Activity::Fast, 29},
                                                         {Activity::WithBag, 27}, {Activity::Downstairs, 7},
                                                         {Activity::Upstairs, 6}, {Activity::Sitting, 16}};
    for (auto [a, windows] : expected) {
        const auto s = generate_series(spec, 1, 1, a);
        CHECK(segment(s).size() == windows);
    }
    const auto normal = generate_series(spec, 1, 1, Activity::Normal);
    CHECK(normal.samples.size() == 7168);
    SensorSeries copy = normal;
    CHECK(estimate_rate(copy) == doctest::Approx(25.6).epsilon(1e-4));
}

TEST_CASE("normal walk peaks at the bin nearest 1.8 Hz") {
    SynthSpec exact;
    exact.freq_jitter = 0.0;
    const std::size_t bin_18 = static_cast<std::size_t>(std::lround(1.8 * 256 / 25.6));
    for (int u = 1; u <= 5; ++u) CHECK(dominant_bin(generate_series(exact, u, 1, Activity::Normal)) == bin_18);

    const SynthSpec spec;
    for (int u = 1; u <= 10; ++u) {
        const auto b = static_cast<long>(dominant_bin(generate_series(spec, u, 1, Activity::Normal)));
        CHECK(std::abs(b - static_cast<long>(bin_18)) <= 1);
    }
}

TEST_CASE("activity groups are spectrally separable; sitting is quiet") {
    SynthSpec spec;
    spec.freq_jitter = 0.0;
    const auto normal = dominant_bin(generate_series(spec, 2, 1, Activity::Normal));
    const auto bag = dominant_bin(generate_series(spec, 2, 1, Activity::WithBag));
    const auto fast = dominant_bin(generate_series(spec, 2, 1, Activity::Fast));
    const auto down = dominant_bin(generate_series(spec, 2, 1, Activity::Downstairs));
    const auto up = dominant_bin(generate_series(spec, 2, 1, Activity::Upstairs));
    CHECK(normal == bag);
    const std::set<std::size_t> groups = {normal, fast, down, up};
    CHECK(groups.size() == 4);

    const SynthSpec defaults;
    const double sitting = non_dc_energy(generate_series(defaults, 1, 1, Activity::Sitting)) /
                           static_cast<double>(segment(generate_series(defaults, 1, 1, Activity::Sitting)).size());
    for (Activity a : {Activity::Normal, Activity::Fast, Activity::WithBag, Activity::Downstairs, Activity::Upstairs}) {
        const auto s = generate_series(defaults, 1, 1, a);
        CHECK(sitting < 0.1 * non_dc_energy(s) / static_cast<double>(segment(s).size()));
    }
}

TEST_CASE("spec validation") {
    SynthSpec bad;
    bad.duration_s[code(Activity::Fast)] = -5;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    SynthSpec same;
    same.classes[code(Activity::WithBag)] = same.classes[code(Activity::Normal)];
    CHECK_THROWS_AS(same.validate(), UsageError);
    SynthSpec users;
    users.n_users = 0;
    CHECK_THROWS_AS(users.validate(), UsageError);
    CHECK_NOTHROW(SynthSpec{}.validate());
}

TEST_CASE("user ids sort numerically") {
    SynthSpec s;
    CHECK(synth_user_id(s, 7) == "07");
    CHECK(synth_user_id(s, 60) == "60");
    s.n_users = 150;
    CHECK(synth_user_id(s, 7) == "007");
}

TEST_CASE("written tree parses back to the generated series") {
    const auto root = std::filesystem::temp_directory_path() / "har_synth_tree_test";
    std::filesystem::remove_all(root);
    auto spec = small_spec(2);
    spec.days = 1;
    CHECK(write_synthetic_dataset(spec, root) == 12);
    const auto path = root / "user_02" / "day_1" / "with_bag.csv";
    REQUIRE(std::filesystem::exists(path));
    const auto parsed = parse_sensor_csv(path, ColumnMap::canonical(), {"02", 1, Activity::WithBag});
    CHECK(parsed.series.samples == generate_series(spec, 2, 1, Activity::WithBag).samples);
    std::filesystem::remove_all(root);
}
