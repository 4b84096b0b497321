#pragma once

// Straight-line definitional reimplementations used as test oracles. They
// share no code with the library: long double accumulation, an O(L^2) DFT,
// and explicit loops over every definition.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "har/manifest.hpp"
#include "har/segment.hpp"

namespace har::oracle {

using Vec = std::vector<double>;

inline long double mean(const Vec& x) {
    long double s = 0;
    for (double v : x) s += v;
    return s / x.size();
}

inline long double central_moment(const Vec& x, int k) {
    const long double m = mean(x);
    long double s = 0;
    for (double v : x) s += std::pow(static_cast<long double>(v) - m, k);
    return s / x.size();
}

inline bool is_constant(const Vec& x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
}

inline long double percentile(Vec x, long double p) {
    std::sort(x.begin(), x.end());
    const long double h = (x.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= x.size()) return x.back();
    return x[lo] + (h - lo) * (static_cast<long double>(x[lo + 1]) - x[lo]);
}

inline Vec dft_magnitude(const Vec& x) {
    const std::size_t n = x.size();
    Vec out(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        long double re = 0, im = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const long double ang = -2.0L * std::numbers::pi_v<long double> * ((k * t) % n) / n;
            re += x[t] * std::cos(ang);
            im += x[t] * std::sin(ang);
        }
        out[k] = static_cast<double>(std::sqrt(re * re + im * im));
    }
    return out;
}

inline long double covariance(const Vec& a, const Vec& b) {
    const long double ma = mean(a), mb = mean(b);
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / a.size();
}

struct Peaks {
    std::vector<std::size_t> maxima, minima;
};

inline Peaks find_peaks(const Vec& x) {
    Peaks p;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (x[i - 1] < x[i] && x[i] >= x[i + 1]) p.maxima.push_back(i);
        if (x[i - 1] > x[i] && x[i] <= x[i + 1]) p.minima.push_back(i);
    }
    return p;
}

inline long double scalar(Statistic s, const Vec& x, double rate_hz) {
    switch (s) {
        case Statistic::Mean: return mean(x);
        case Statistic::Variance: return central_moment(x, 2);
        case Statistic::Std: return std::sqrt(central_moment(x, 2));
        case Statistic::Median:
        case Statistic::P50: return percentile(x, 0.5L);
        case Statistic::P25: return percentile(x, 0.25L);
        case Statistic::P75: return percentile(x, 0.75L);
        case Statistic::Iqr: return percentile(x, 0.75L) - percentile(x, 0.25L);
        case Statistic::Max: return *std::max_element(x.begin(), x.end());
        case Statistic::Min: return *std::min_element(x.begin(), x.end());
        case Statistic::Difference:
            return static_cast<long double>(*std::max_element(x.begin(), x.end())) - *std::min_element(x.begin(), x.end());
        case Statistic::Rms: {
            long double s2 = 0;
            for (double v : x) s2 += static_cast<long double>(v) * v;
            return std::sqrt(s2 / x.size());
        }
        case Statistic::AvgAbsDiff: {
            const long double m = mean(x);
            long double s1 = 0;
            for (double v : x) s1 += std::fabs(v - m);
            return s1 / x.size();
        }
        case Statistic::Skewness:
            return is_constant(x) ? 0 : central_moment(x, 3) / std::pow(central_moment(x, 2), 1.5L);
        case Statistic::Kurtosis:
            return is_constant(x) ? 0 : central_moment(x, 4) / std::pow(central_moment(x, 2), 2) - 3;
        case Statistic::ZeroCrossingRate: {
            const long double m = mean(x);
            int c = 0;
            for (std::size_t i = 0; i + 1 < x.size(); ++i) {
                if ((x[i] - m) * (x[i + 1] - m) < 0) ++c;
            }
            return static_cast<long double>(c) / (x.size() - 1);
        }
        case Statistic::MaxPeak: {
            auto p = find_peaks(x);
            if (p.maxima.empty()) return 0;
            long double best = x[p.maxima[0]];
            for (auto i : p.maxima) best = std::max<long double>(best, x[i]);
            return best;
        }
        case Statistic::MinPeak: {
            auto p = find_peaks(x);
            if (p.minima.empty()) return 0;
            long double best = x[p.minima[0]];
            for (auto i : p.minima) best = std::min<long double>(best, x[i]);
            return best;
        }
        case Statistic::PeakCount: return find_peaks(x).maxima.size();
        case Statistic::TimeBetweenPeaks: {
            auto p = find_peaks(x);
            if (p.maxima.size() < 2) return 0;
            long double gaps = 0;
            for (std::size_t i = 1; i < p.maxima.size(); ++i) gaps += (p.maxima[i] - p.maxima[i - 1]) / static_cast<long double>(rate_hz);
            return gaps / (p.maxima.size() - 1);
        }
        case Statistic::Entropy: {
            long double total = 0;
            for (std::size_t k = 1; k < x.size(); ++k) total += static_cast<long double>(x[k]) * x[k];
            if (total == 0) return 0;
            long double h = 0;
            for (std::size_t k = 1; k < x.size(); ++k) {
                const long double p = static_cast<long double>(x[k]) * x[k] / total;
                if (p > 0) h -= p * std::log(p);
            }
            return h;
        }
        case Statistic::Energy: {
            long double total = 0;
            for (std::size_t k = 1; k < x.size(); ++k) total += static_cast<long double>(x[k]) * x[k];
            return total / (x.size() - 1);
        }
        default: return std::nan("");
    }
}

// Value of one manifest descriptor on a window, from first principles.
inline double feature(const FeatureDescriptor& d, const Window& w) {
    const std::size_t base = d.sensor == Sensor::Acc ? 0 : 3;
    auto axis_signal = [&](std::size_t a) {
        const Vec& raw = w.data[base + a];
        return d.domain == Domain::Time ? raw : dft_magnitude(raw);
    };
    auto resultant_signal = [&] {
        Vec x = axis_signal(0), y = axis_signal(1), z = axis_signal(2), r(x.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::hypot(x[i], y[i], z[i]);
        return r;
    };
    switch (d.statistic) {
        case Statistic::Covariance:
        case Statistic::Correlation: {
            std::size_t a = 0, b = 2;
            if (d.axis == Axis::XY) b = 1;
            if (d.axis == Axis::YZ) a = 1;
            Vec sa = axis_signal(a), sb = axis_signal(b);
            if (d.statistic == Statistic::Covariance) return static_cast<double>(covariance(sa, sb));
            if (is_constant(sa) || is_constant(sb)) return 0.0;
            return static_cast<double>(covariance(sa, sb) / std::sqrt(central_moment(sa, 2) * central_moment(sb, 2)));
        }
        case Statistic::AvgResultant: return static_cast<double>(mean(resultant_signal()));
        case Statistic::Binned: {
            Vec x = axis_signal(static_cast<std::size_t>(d.axis));
            const double lo = *std::min_element(x.begin(), x.end()), hi = *std::max_element(x.begin(), x.end());
            if (lo == hi) return 0.1;
            int count = 0;
            for (double v : x) {
                int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * 10.0));
                b = std::clamp(b, 0, 9);
                if (b == d.bin) ++count;
            }
            return static_cast<double>(count) / x.size();
        }
        default: {
            Vec x = d.axis == Axis::Resultant ? resultant_signal() : axis_signal(static_cast<std::size_t>(d.axis));
            return static_cast<double>(scalar(d.statistic, x, w.rate_hz));
        }
    }
}

}  // namespace har::oracle
