#include "har/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "har/error.hpp"

namespace har {

namespace {

constexpr std::array<std::string_view, 26> kStatNames = {
    "mean",       "std",      "median",        "variance", "covariance", "zcr",
    "iqr",        "avg_abs_diff", "rms",       "skewness", "kurtosis",   "p25",
    "p50",        "p75",      "max",           "min",      "correlation", "avg_resultant",
    "difference", "binned",   "max_peak",      "min_peak", "peak_count", "time_between_peaks",
    "entropy",    "energy",
};

// Local maximum: x[i-1] < x[i] >= x[i+1]; endpoints excluded.
template <class Cmp>
void scan_peaks(std::span<const double> x, Cmp strictly_beyond, std::size_t& count,
                double& extreme, std::size_t& first, std::size_t& last, bool want_max) {
    count = 0;
    extreme = 0.0;
    first = last = 0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (strictly_beyond(x[i], x[i - 1]) && !strictly_beyond(x[i + 1], x[i])) {
            if (count == 0) {
                extreme = x[i];
                first = i;
            } else if (want_max ? x[i] > extreme : x[i] < extreme) {
                extreme = x[i];
            }
            last = i;
            ++count;
        }
    }
}

}  // namespace

std::string_view statistic_name(Statistic s) { return kStatNames[static_cast<std::size_t>(s)]; }

std::optional<Statistic> parse_statistic(std::string_view name) {
    for (std::size_t i = 0; i < kStatNames.size(); ++i) {
        if (kStatNames[i] == name) return static_cast<Statistic>(i);
    }
    return std::nullopt;
}

SignalProfile::SignalProfile(std::span<const double> x, double rate_hz)
    : x_(x), sorted_(x.begin(), x.end()), rate_hz_(rate_hz) {
    if (x.size() < 2) throw UsageError("statistics need at least 2 samples");
    std::sort(sorted_.begin(), sorted_.end());
    constant_ = sorted_.front() == sorted_.back();
    const double n = static_cast<double>(x.size());
    // Extended precision keeps near-zero odd moments accurate.
    long double sum = 0.0L;
    for (double v : x) sum += v;
    const long double mean = sum / n;
    mean_ = static_cast<double>(mean);
    if (constant_) {
        mean_ = sorted_.front();
        return;
    }
    long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
    for (double v : x) {
        const long double d = v - mean;
        const long double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2_ = static_cast<double>(m2 / n);
    m3_ = static_cast<double>(m3 / n);
    m4_ = static_cast<double>(m4 / n);
    // Shape ratios in extended precision: excess kurtosis cancels near 3.
    const long double v = m2 / n;
    skewness_ = static_cast<double>((m3 / n) / (v * std::sqrt(v)));
    kurtosis_ = static_cast<double>((m4 / n) / (v * v) - 3.0L);
}

double SignalProfile::percentile(double p) const {
    const double pos = p / 100.0 * static_cast<double>(sorted_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted_.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted_[lo] + frac * (sorted_[hi] - sorted_[lo]);
}

double SignalProfile::scalar(Statistic kind) const {
    const double n = static_cast<double>(x_.size());
    switch (kind) {
        case Statistic::Mean: return mean_;
        case Statistic::Variance: return m2_;
        case Statistic::Std: return std::sqrt(m2_);
        case Statistic::Median:
        case Statistic::P50: return percentile(50.0);
        case Statistic::P25: return percentile(25.0);
        case Statistic::P75: return percentile(75.0);
        case Statistic::Iqr: return percentile(75.0) - percentile(25.0);
        case Statistic::Max: return sorted_.back();
        case Statistic::Min: return sorted_.front();
        case Statistic::Difference: return sorted_.back() - sorted_.front();
        case Statistic::Rms: {
            double s = 0.0;
            for (double v : x_) s += v * v;
            return std::sqrt(s / n);
        }
        case Statistic::AvgAbsDiff: {
            if (constant_) return 0.0;
            double s = 0.0;
            for (double v : x_) s += std::abs(v - mean_);
            return s / n;
        }
        case Statistic::Skewness: return constant_ ? 0.0 : skewness_;
        case Statistic::Kurtosis: return constant_ ? 0.0 : kurtosis_;
        case Statistic::ZeroCrossingRate: {
            if (constant_) return 0.0;
            std::size_t crossings = 0;
            for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
                const double a = x_[i] - mean_;
                const double b = x_[i + 1] - mean_;
                if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) ++crossings;
            }
            return static_cast<double>(crossings) / (n - 1.0);
        }
        case Statistic::MaxPeak:
        case Statistic::PeakCount:
        case Statistic::TimeBetweenPeaks: {
            std::size_t count = 0, first = 0, last = 0;
            double extreme = 0.0;
            scan_peaks(x_, [](double a, double b) { return a > b; }, count, extreme, first, last, true);
            if (kind == Statistic::MaxPeak) return extreme;
            if (kind == Statistic::PeakCount) return static_cast<double>(count);
            if (count < 2 || !(rate_hz_ > 0.0)) return 0.0;
            // Mean gap between consecutive maxima telescopes to (last - first) / (count - 1).
            return static_cast<double>(last - first) / static_cast<double>(count - 1) / rate_hz_;
        }
        case Statistic::MinPeak: {
            std::size_t count = 0, first = 0, last = 0;
            double extreme = 0.0;
            scan_peaks(x_, [](double a, double b) { return a < b; }, count, extreme, first, last, false);
            return extreme;
        }
        case Statistic::Entropy: {
            double total = 0.0;
            for (std::size_t k = 1; k < x_.size(); ++k) total += x_[k] * x_[k];
            if (!(total > 0.0)) return 0.0;
            double h = 0.0;
            for (std::size_t k = 1; k < x_.size(); ++k) {
                const double p = x_[k] * x_[k] / total;
                if (p > 0.0) h -= p * std::log(p);
            }
            return h;
        }
        case Statistic::Energy: {
            double total = 0.0;
            for (std::size_t k = 1; k < x_.size(); ++k) total += x_[k] * x_[k];
            return total / static_cast<double>(x_.size() - 1);
        }
        case Statistic::AvgResultant:
        case Statistic::Covariance:
        case Statistic::Correlation:
        case Statistic::Binned: break;
    }
    throw UsageError("statistic '" + std::string(statistic_name(kind)) + "' is not a single-signal scalar");
}

double compute_statistic(Statistic kind, std::span<const double> x, double rate_hz) {
    return SignalProfile(x, rate_hz).scalar(kind);
}

double compute_pair_statistic(Statistic kind, std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw UsageError("pair statistic needs equal lengths >= 2");
    if (kind != Statistic::Covariance && kind != Statistic::Correlation) {
        throw UsageError("not a pair statistic: " + std::string(statistic_name(kind)));
    }
    const SignalProfile pa(a), pb(b);
    const double n = static_cast<double>(a.size());
    double cov = 0.0;
    if (!pa.constant() && !pb.constant()) {
        for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - pa.mean()) * (b[i] - pb.mean());
        cov /= n;
    }
    if (kind == Statistic::Covariance) return cov;
    if (pa.constant() || pb.constant()) return 0.0;
    return cov / std::sqrt(pa.variance() * pb.variance());
}

std::vector<double> binned_distribution(std::span<const double> x, std::size_t bins) {
    if (x.empty() || bins == 0) throw UsageError("binned distribution needs samples and bins");
    std::vector<double> out(bins, 0.0);
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(bins));
        return out;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double v : x) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= bins) b = bins - 1;
        out[b] += 1.0;
    }
    for (double& c : out) c /= static_cast<double>(x.size());
    return out;
}

std::vector<double> resultant(std::span<const double> x, std::span<const double> y,
                              std::span<const double> z) {
    if (x.size() != y.size() || x.size() != z.size()) throw UsageError("resultant: length mismatch");
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
    return r;
}

}  // namespace har
