#pragma once

#include <complex>
#include <span>
#include <vector>

namespace arsep {

/// Real-input FFT of length n (any n); returns n/2 + 1 bins.
std::vector<std::complex<double>> rfft(std::span<const double> input);

/// Inverse of rfft for an output of length n (unnormalized by FFTW, scaled here
/// so irfft(rfft(x)) == x).
std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t n);

}  // namespace arsep
