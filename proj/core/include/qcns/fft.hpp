#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qcns {

// Real-to-complex FFT, X[k] = sum_j x[j] exp(-2*pi*i*j*k/n), k = 0..n/2.
std::vector<std::complex<double>> rfft(std::span<const double> x);

// Inverse of rfft including the 1/n normalization; n is the output length.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, size_t n);

}  // namespace qcns
