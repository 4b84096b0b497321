#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace har {

enum class Statistic {
    Mean,
    Std,
    Median,
    Variance,
    Covariance,
    ZeroCrossingRate,
    Iqr,
    AvgAbsDiff,
    Rms,
    Skewness,
    Kurtosis,
    P25,
    P50,
    P75,
    Max,
    Min,
    Correlation,
    AvgResultant,
    Difference,
    Binned,
    MaxPeak,
    MinPeak,
    PeakCount,
    TimeBetweenPeaks,
    Entropy,
    Energy,
};

inline constexpr std::size_t kBinCount = 10;

std::string_view statistic_name(Statistic s);
std::optional<Statistic> parse_statistic(std::string_view name);

// Cached moments and order statistics of one signal. Every scalar statistic
// is derived from it, so a window's channel is sorted and summed only once.
class SignalProfile {
public:
    // rate_hz only matters for TimeBetweenPeaks.
    explicit SignalProfile(std::span<const double> x, double rate_hz = 0.0);

    double mean() const { return mean_; }
    double variance() const { return m2_; }
    bool constant() const { return constant_; }
    std::span<const double> values() const { return x_; }

    double percentile(double p) const;

    // Scalar statistics only; pair, triple and binned kinds throw UsageError.
    double scalar(Statistic kind) const;

private:
    std::span<const double> x_;
    std::vector<double> sorted_;
    double rate_hz_;
    double mean_ = 0.0;
    double m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
    double skewness_ = 0.0, kurtosis_ = 0.0;
    bool constant_ = false;
};

// Single-signal scalar statistic. Requires at least 2 samples.
double compute_statistic(Statistic kind, std::span<const double> x, double rate_hz = 0.0);

// Population covariance or Pearson correlation of two equal-length signals.
// Correlation with a constant signal is 0.
double compute_pair_statistic(Statistic kind, std::span<const double> a, std::span<const double> b);

// Relative counts over kBinCount equal-width bins spanning [min, max];
// a constant signal yields the uniform distribution.
std::vector<double> binned_distribution(std::span<const double> x, std::size_t bins = kBinCount);

// Per-sample Euclidean norm of three equal-length signals.
std::vector<double> resultant(std::span<const double> x, std::span<const double> y,
                              std::span<const double> z);

}  // namespace har
