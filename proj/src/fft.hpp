#pragma once

// Thin wrapper over FFTW's real-to-complex transforms in double and long
// double. Plans are cached per size; execution uses the new-array interface
// and is safe from several threads.

#include <complex>
#include <span>

namespace hombridge::detail {

/// out[m] = sum_j in[j] exp(-2 pi i j m / n), m = 0..n/2 (unnormalized).
void forward_fft(std::span<const long double> in, std::span<std::complex<long double>> out);
void forward_fft(std::span<const double> in, std::span<std::complex<double>> out);

/// Inverse of forward_fft without the 1/n factor. `in` has n/2+1 entries.
void inverse_fft(std::span<const std::complex<long double>> in, std::span<long double> out);
void inverse_fft(std::span<const std::complex<double>> in, std::span<double> out);

}  // namespace hombridge::detail
