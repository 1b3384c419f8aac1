#pragma once

#include <cstddef>

#include "lle/grid.hpp"

namespace lle {

// Forward transform is normalized by 1/n so that coefficients are Fourier-series amplitudes.
void fft_forward(const cd* in, cd* out, std::size_t n);
void fft_inverse(const cd* in, cd* out, std::size_t n);

CVec fft_forward(const CVec& in);
CVec fft_inverse(const CVec& in);

}  // namespace lle
