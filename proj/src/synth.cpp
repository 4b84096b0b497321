#include "har/synth.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <random>

#include "har/error.hpp"
#include "har/parallel.hpp"

namespace har {

std::array<ClassSignal, kActivityCount> SynthSpec::default_classes() {
    constexpr double kPi = std::numbers::pi;
    std::array<ClassSignal, kActivityCount> c{};
    c[code(Activity::Normal)] = {1.8, {1.0, 2.0, 0.8}, {0.4, 0.8, 0.3}, 0.5, 0.25, 0.0, 0.0, 0.3, 0.1};
    c[code(Activity::Fast)] = {2.4, {1.4, 2.8, 1.1}, {0.55, 1.1, 0.4}, 0.5, 0.25, 0.0, 0.0, 0.3, 0.1};
    c[code(Activity::WithBag)] = {1.8, {1.0, 2.0, 0.8}, {0.4, 0.8, 0.3}, 0.42, 0.19, 0.0, 0.0, 0.3, 0.1};
    c[code(Activity::Downstairs)] = {2.0, {1.2, 2.6, 0.9}, {0.45, 0.9, 0.35}, 0.7, 0.4, kPi / 3, kPi / 2, 0.3, 0.1};
    c[code(Activity::Upstairs)] = {1.6, {0.9, 1.8, 0.7}, {0.35, 0.7, 0.25}, 0.45, 0.2, kPi / 6, 0.0, 0.3, 0.1};
    c[code(Activity::Sitting)] = {0.0, {0, 0, 0}, {0, 0, 0}, 0.0, 0.0, 0.0, 0.0, 0.05, 0.01};
    return c;
}

void SynthSpec::validate() const {
    if (n_users < 1) throw UsageError("synth: n_users must be >= 1");
    if (days < 1) throw UsageError("synth: days must be >= 1");
    if (!(rate_hz > 0) || !std::isfinite(rate_hz)) throw UsageError("synth: rate_hz must be positive");
    if (!(resolution >= 0)) throw UsageError("synth: resolution must be >= 0");
    for (Activity a : kAllActivities) {
        const double d = duration_s[code(a)];
        if (!(d > 0) || !std::isfinite(d)) {
            throw UsageError("synth: duration for " + std::string(activity_name(a)) + " must be positive");
        }
        if (samples(a) < 2) throw UsageError("synth: duration too short for " + std::string(activity_name(a)));
    }
    for (int i = 0; i < kActivityCount; ++i) {
        for (int j = i + 1; j < kActivityCount; ++j) {
            if (classes[i] == classes[j]) throw UsageError("synth: activities share identical signal parameters");
        }
    }
}

std::size_t SynthSpec::samples(Activity a) const {
    return static_cast<std::size_t>(std::llround(duration_s[code(a)] * rate_hz));
}

std::string synth_user_id(const SynthSpec& spec, int user) {
    std::string s = std::to_string(user);
    const std::size_t width = std::max<std::size_t>(2, std::to_string(spec.n_users).size());
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

SensorSeries generate_series(const SynthSpec& spec, int user, int day, Activity activity) {
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const ClassSignal& cls = spec.classes[code(activity)];
    const auto act = static_cast<std::uint64_t>(code(activity));

    // Gait traits belong to the (user, activity) pair and persist across days.
    std::mt19937_64 trait_rng(derive_seed(spec.seed, static_cast<std::uint64_t>(user), 0, act));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double amp_scale = 1.0 + spec.amp_jitter * unit(trait_rng);
    const double freq = cls.fundamental_hz * (1.0 + spec.freq_jitter * unit(trait_rng));
    const double h2 = std::max(0.0, cls.h2 + spec.harmonic_jitter * unit(trait_rng));
    const double h3 = cls.h3;

    std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(day), act));
    std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
    std::array<double, 6> phase{};
    for (double& p : phase) p = phase_dist(rng);
    std::normal_distribution<double> acc_noise(0.0, cls.acc_noise), gyro_noise(0.0, cls.gyro_noise);

    auto quantize = [&](double v) { return spec.resolution > 0 ? std::round(v / spec.resolution) / (1.0 / spec.resolution) : v; };
    auto wave = [&](double t, double phi) {
        const double w = kTwoPi * freq * t + phi;
        return std::sin(w) + h2 * std::sin(2 * w + cls.phase2) + h3 * std::sin(3 * w + cls.phase3);
    };

    SensorSeries s;
    s.user_id = synth_user_id(spec, user);
    s.day = day;
    s.label = activity;
    s.nominal_rate_hz = spec.rate_hz;
    const std::size_t n = spec.samples(activity);
    s.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        RawRecord& r = s.samples[i];
        r.t_ms = std::llround(static_cast<double>(i) * 1000.0 / spec.rate_hz);
        const double t = static_cast<double>(r.t_ms) / 1000.0;
        for (int a = 0; a < 3; ++a) {
            double acc = a == 1 ? spec.gravity : 0.0;
            double gyro = 0.0;
            if (cls.fundamental_hz > 0) {
                acc += amp_scale * cls.acc_amp[a] * wave(t, phase[a]);
                gyro += amp_scale * cls.gyro_amp[a] * wave(t, phase[3 + a]);
            }
            r.acc[a] = quantize(acc + acc_noise(rng));
            r.gyro[a] = quantize(gyro + gyro_noise(rng));
        }
    }
    return s;
}

namespace {

struct SeriesKey {
    int user, day;
    Activity activity;
};

std::vector<SeriesKey> series_keys(const SynthSpec& spec) {
    std::vector<SeriesKey> keys;
    for (int u = 1; u <= spec.n_users; ++u) {
        for (int d = 1; d <= spec.days; ++d) {
            for (Activity a : kAllActivities) keys.push_back({u, d, a});
        }
    }
    return keys;
}

template <class Fn>
void for_each_series(const std::vector<SeriesKey>& keys, Fn&& fn) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(keys.size()); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(har_synth_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<SensorSeries> generate_dataset(const SynthSpec& spec) {
    spec.validate();
    const auto keys = series_keys(spec);
    std::vector<SensorSeries> out(keys.size());
    for_each_series(keys, [&](std::size_t i) { out[i] = generate_series(spec, keys[i].user, keys[i].day, keys[i].activity); });
    return out;
}

std::size_t write_synthetic_dataset(const SynthSpec& spec, const std::filesystem::path& root) {
    spec.validate();
    const auto keys = series_keys(spec);
    for (const auto& k : keys) {
        std::filesystem::create_directories(root / ("user_" + synth_user_id(spec, k.user)) / ("day_" + std::to_string(k.day)));
    }
    for_each_series(keys, [&](std::size_t i) {
        const auto& k = keys[i];
        const auto dir = root / ("user_" + synth_user_id(spec, k.user)) / ("day_" + std::to_string(k.day));
        write_canonical_csv(generate_series(spec, k.user, k.day, k.activity),
                            dir / (std::string(activity_name(k.activity)) + ".csv"));
    });
    return keys.size();
}

}  // namespace har
