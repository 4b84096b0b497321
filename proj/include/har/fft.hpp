#pragma once

#include <complex>
#include <span>
#include <vector>

namespace har {

// Full two-sided DFT, X[k] = sum_n x[n] exp(-2*pi*i*k*n/L). Radix-2 for
// power-of-two lengths, Bluestein's chirp-z otherwise.
std::vector<std::complex<double>> dft(std::span<const double> signal);

// One-sided magnitude spectrum |X[0..floor(L/2)]|, DC included, no taper.
// Throws UsageError for L < 2.
std::vector<double> fft_spectrum(std::span<const double> signal);

}  // namespace har
