#pragma once

#include "lle/grid.hpp"
#include "lle/parameters.hpp"

namespace lle {

// N(u) = i|u|^2 u, the cubic term in complex notation.
RealPairField kerr(const RealPairField& u);
// N'(base) v = i(2|base|^2 v + base^2 conj(v)).
RealPairField kerr_derivative(const RealPairField& base, const RealPairField& v);

// G(u) = -beta i u_xx - (1 + i alpha) u + i|u|^2 u + F.
RealPairField stationary_residual(const RealPairField& u, const WaveParameters& params);

// L0(base) f = J(-beta f_xx - alpha f) - f + N'(base) f with base on the grid of f.
RealPairField apply_linearization(const RealPairField& base, const RealPairField& f,
                                  const WaveParameters& params);

// Fourier symbol of the linear part: -1 + i(beta k^2 - alpha).
cd linear_symbol(double k, const WaveParameters& params);

}  // namespace lle
