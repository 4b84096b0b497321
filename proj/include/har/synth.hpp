#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "har/activity.hpp"
#include "har/ingest.hpp"

namespace har {

// Per-activity gait signal: a fundamental plus two harmonics on every axis.
// A fundamental of 0 produces a stationary (noise only) signal.
struct ClassSignal {
    double fundamental_hz = 0.0;
    std::array<double, 3> acc_amp{};
    std::array<double, 3> gyro_amp{};
    double h2 = 0.0, h3 = 0.0;          // harmonic amplitude relative to the fundamental
    double phase2 = 0.0, phase3 = 0.0;  // harmonic phase offsets (radians)
    double acc_noise = 0.0, gyro_noise = 0.0;

    friend bool operator==(const ClassSignal&, const ClassSignal&) = default;
};

struct SynthSpec {
    std::uint64_t seed = 42;
    int n_users = 60;
    int days = 2;
    std::array<double, kActivityCount> duration_s{280, 290, 270, 70, 60, 160};
    double rate_hz = 25.6;
    double gravity = 9.81;
    // Per-user, per-activity jitter half-widths.
    double amp_jitter = 0.15;
    double freq_jitter = 0.03;
    double harmonic_jitter = 0.08;
    // Values are rounded to this step, like a sensor with finite resolution.
    double resolution = 1e-4;
    std::array<ClassSignal, kActivityCount> classes = default_classes();

    static std::array<ClassSignal, kActivityCount> default_classes();

    // Throws UsageError on a non-positive duration, rate, or count, or on
    // two activities sharing a parameter set.
    void validate() const;

    std::size_t samples(Activity a) const;
};

// Zero-padded id ("01".."60") so string order matches numeric order.
std::string synth_user_id(const SynthSpec& spec, int user);

// user in [1, n_users], day in [1, days].
SensorSeries generate_series(const SynthSpec& spec, int user, int day, Activity activity);

// All series in canonical (user, day, activity) order.
std::vector<SensorSeries> generate_dataset(const SynthSpec& spec);

// Writes <root>/user_<id>/day_<d>/<activity>.csv; returns the file count.
std::size_t write_synthetic_dataset(const SynthSpec& spec, const std::filesystem::path& root);

}  // namespace har
