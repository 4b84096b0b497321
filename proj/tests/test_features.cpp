#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "har/error.hpp"
#include "har/features.hpp"
#include "har/fft.hpp"
#include "har/manifest.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

using namespace har;

namespace {

Window random_window(std::mt19937_64& rng, std::size_t L = 256) {
    Window w;
    w.user_id = "03";
    w.day = 1;
    w.label = Activity::Downstairs;
    w.rate_hz = 25.6;
    for (std::size_t c = 0; c < kChannels; ++c) {
        w.data[c] = test::random_signal(rng, L, c < 3 ? 2.0 : 0.5);
        if (c == AccY) {
            for (double& v : w.data[c]) v += 9.81;
        }
    }
    return w;
}

Window constant_window(std::array<double, 6> values, std::size_t L = 256) {
    Window w;
    w.rate_hz = 25.6;
    for (std::size_t c = 0; c < kChannels; ++c) w.data[c].assign(L, values[c]);
    return w;
}

}  // namespace

TEST_CASE("default manifest layout") {
    const auto m = FeatureManifest::default_catalogue();
    CHECK(m.size() == 314);
    std::set<std::string> unique(m.ids().begin(), m.ids().end());
    CHECK(unique.size() == m.size());
    CHECK(m.index_of("acc.time.mean.x") == 0u);
    CHECK(m.index_of("gyro.freq.entropy.z").has_value());
    CHECK(m.index_of("acc.time.binned.y_bin9").has_value());
    CHECK(m.index_of("acc.time.max.resultant").has_value());
    CHECK_FALSE(m.index_of("acc.freq.entropy.xy"));
    CHECK(m.content_hash().size() == 16);
}

TEST_CASE("manifest ids parse back to their descriptors") {
    const auto m = FeatureManifest::default_catalogue();
    for (const auto& d : m.descriptors()) {
        CHECK(FeatureDescriptor::parse(d.id()) == d);
        CHECK(is_legal(d));
    }
    CHECK_THROWS_AS(FeatureDescriptor::parse("acc.time.bogus.x"), UsageError);
    CHECK_THROWS_AS(FeatureDescriptor::parse("acc.time"), UsageError);
}

TEST_CASE("illegal and duplicate descriptors are rejected") {
    FeatureDescriptor entropy_time{Sensor::Acc, Domain::Time, Statistic::Entropy, Axis::X};
    CHECK_FALSE(is_legal(entropy_time));
    CHECK_THROWS_AS(FeatureManifest({entropy_time}), UsageError);
    FeatureDescriptor mean_x{Sensor::Acc, Domain::Time, Statistic::Mean, Axis::X};
    CHECK_THROWS_AS(FeatureManifest({mean_x, mean_x}), UsageError);
    std::istringstream in("acc.time.mean.x\nacc.freq.entropy.xy\n");
    CHECK_THROWS_AS(FeatureManifest::parse(in), UsageError);
}

TEST_CASE("manifest file round trip and hash sensitivity") {
    const auto m = FeatureManifest::default_catalogue();
    std::stringstream io;
    m.write(io);
    const auto back = FeatureManifest::parse(io);
    CHECK(back.ids() == m.ids());
    CHECK(back.content_hash() == m.content_hash());

    std::istringstream a("# comment\nacc.time.mean.x\n\ngyro.freq.energy.y  # trailing\n");
    std::istringstream b("gyro.freq.energy.y\nacc.time.mean.x\n");
    const auto ma = FeatureManifest::parse(a), mb = FeatureManifest::parse(b);
    CHECK(ma.size() == 2);
    CHECK(ma.content_hash() != mb.content_hash());
}

TEST_CASE("all-zero window") {
    const auto m = FeatureManifest::default_catalogue();
    const auto fv = extract_window(constant_window({0, 0, 0, 0, 0, 0}), m);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& d = m.descriptors()[i];
        INFO(m.ids()[i]);
        CHECK(std::isfinite(fv.values[i]));
        if (d.statistic == Statistic::Binned) {
            CHECK(fv.values[i] == doctest::Approx(0.1));
        } else if (d.statistic == Statistic::Mean || d.statistic == Statistic::Std || d.statistic == Statistic::Variance ||
                   d.statistic == Statistic::Energy || d.statistic == Statistic::Correlation) {
            CHECK(fv.values[i] == 0.0);
        }
    }
}

TEST_CASE("constant (3,4,0) acceleration has resultant 5") {
    const auto m = FeatureManifest::default_catalogue();
    const auto fv = extract_window(constant_window({3, 4, 0, 0, 0, 0}), m);
    CHECK(fv.values[*m.index_of("acc.time.avg_resultant.resultant")] == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(fv.values[*m.index_of("acc.time.max.resultant")] == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("every manifest feature matches its definitional oracle") {
    const auto m = FeatureManifest::default_catalogue();
    std::mt19937_64 rng(2024);
    double worst = 0;
    std::string worst_id;
    for (int trial = 0; trial < 50; ++trial) {
        const Window w = random_window(rng);
        const auto fv = extract_window(w, m);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double want = oracle::feature(m.descriptors()[i], w);
            const double got = fv.values[i];
            const double denom = std::max(std::abs(want), std::abs(got));
            const double rel = denom == 0 ? 0 : std::abs(got - want) / denom;
            if (rel > worst) {
                worst = rel;
                worst_id = m.ids()[i];
            }
        }
    }
    INFO("worst feature: " << worst_id);
    CHECK(worst < 1e-12);
}

TEST_CASE("frequency features are statistics of the spectrum") {
    const auto m = FeatureManifest::default_catalogue();
    std::mt19937_64 rng(8);
    const Window w = random_window(rng);
    const auto fv = extract_window(w, m);
    const auto spec = fft_spectrum(w.data[GyrY]);
    for (Statistic s : {Statistic::Mean, Statistic::Kurtosis, Statistic::P75, Statistic::Entropy}) {
        FeatureDescriptor d{Sensor::Gyro, Domain::Freq, s, Axis::Y};
        CHECK(fv.values[*m.index_of(d.id())] == compute_statistic(s, spec));
    }
}

TEST_CASE("parallel extraction equals the serial reference bit for bit") {
    const auto m = FeatureManifest::default_catalogue();
    std::mt19937_64 rng(77);
    std::vector<Window> windows;
    for (int i = 0; i < 40; ++i) {
        windows.push_back(random_window(rng, 128));
        windows.back().start_index = static_cast<std::size_t>(i) * 128;
    }
    const auto par = extract_matrix(windows, m);
    const auto ser = extract_matrix_serial(windows, m);
    CHECK(par.values == ser.values);
    CHECK(par.rows == ser.rows);
    CHECK(extract_matrix(windows, m).values == par.values);
}

TEST_CASE("feature CSV round trip") {
    const auto m = FeatureManifest::default_catalogue();
    std::mt19937_64 rng(1);
    std::vector<Window> windows = {random_window(rng), random_window(rng)};
    windows[1].label = Activity::Sitting;
    windows[1].start_index = 256;
    const auto fm = extract_matrix(windows, m);
    std::stringstream io;
    write_feature_csv(fm, io);
    const std::string text = io.str();
    CHECK(text.rfind("user,day,activity,start_index,acc.time.mean.x", 0) == 0);
    const auto back = read_feature_csv(io);
    CHECK(back.feature_ids == fm.feature_ids);
    CHECK(back.rows == fm.rows);
    CHECK(back.values == fm.values);
    CHECK(back.label_codes() == std::vector<int>{3, 5});

    std::istringstream bad("user,day,activity,start_index,f\n01,1,walking_on_hands,0,1\n");
    CHECK_THROWS_AS(read_feature_csv(bad), DataError);
}
