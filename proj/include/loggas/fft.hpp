#pragma once

#include <vector>

#include "loggas/common.hpp"

namespace loggas {

// In-place complex DFT. forward: X_k = sum x_n e^{-2 pi i k n / N}; inverse is unnormalized.
void fft_inplace(std::vector<cplx>& data, bool forward);

std::size_t next_pow2(std::size_t n);

// Angular frequency of bin k for an N-point transform with sample spacing dx.
double fft_frequency(std::size_t k, std::size_t n, double dx);

// Applies the Fourier multiplier m(s) to samples f on a uniform grid with spacing dx.
// The input is zero padded to at least pad_factor * f.size() points.
std::vector<cplx> apply_multiplier(const std::vector<cplx>& f, double dx, const std::function<cplx(double)>& m,
                                   std::size_t pad_factor = 4);

}  // namespace loggas
