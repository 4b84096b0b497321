#include "har/fft.hpp"

#include <cmath>
#include <numbers>

#include "har/error.hpp"

namespace har {

namespace {

// Transforms run in extended precision so that small bins keep full double
// accuracy next to large ones.
using real = long double;
using cd = std::complex<real>;

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

// In-place iterative radix-2; inverse=true computes the unscaled inverse.
void fft_pow2(std::vector<cd>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const real sign = inverse ? 1.0L : -1.0L;
    std::vector<cd> tw(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const real ang = sign * 2.0L * std::numbers::pi_v<real> * static_cast<real>(k) / static_cast<real>(n);
        tw[k] = cd(std::cos(ang), std::sin(ang));
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < half; ++j) {
                cd u = a[i + j];
                cd v = a[i + j + half] * tw[j * step];
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
    }
}

std::vector<cd> bluestein(std::span<const double> x) {
    const std::size_t n = x.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    // chirp[k] = exp(-i*pi*k^2/n); k^2 reduced mod 2n keeps the angle small.
    std::vector<cd> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        const real ang = -std::numbers::pi_v<real> * static_cast<real>(k2) / static_cast<real>(n);
        chirp[k] = cd(std::cos(ang), std::sin(ang));
    }
    std::vector<cd> a(m), b(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = static_cast<real>(x[k]) * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_pow2(a, true);
    std::vector<cd> out(n);
    const real scale = 1.0L / static_cast<real>(m);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
    return out;
}

std::vector<cd> transform(std::span<const double> signal) {
    if (signal.size() < 2) throw UsageError("DFT needs at least 2 samples");
    if (!is_pow2(signal.size())) return bluestein(signal);
    std::vector<cd> a(signal.begin(), signal.end());
    fft_pow2(a, false);
    return a;
}

}  // namespace

std::vector<std::complex<double>> dft(std::span<const double> signal) {
    const auto full = transform(signal);
    std::vector<std::complex<double>> out(full.size());
    for (std::size_t k = 0; k < full.size(); ++k) out[k] = {static_cast<double>(full[k].real()), static_cast<double>(full[k].imag())};
    return out;
}

std::vector<double> fft_spectrum(std::span<const double> signal) {
    const auto full = transform(signal);
    std::vector<double> mag(signal.size() / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = static_cast<double>(std::hypot(full[k].real(), full[k].imag()));
    return mag;
}

}  // namespace har
