#include "lle/operators.hpp"

#include <cmath>
#include <numbers>

#include "lle/error.hpp"
#include "lle/spectral.hpp"

namespace lle {

void WaveParameters::validate() const {
  require(beta == 1 || beta == -1, "beta must be +1 or -1");
  require(std::isfinite(alpha), "alpha must be finite");
  require(std::isfinite(forcing) && forcing >= 0.0, "forcing must be nonnegative");
  require(std::isfinite(period) && period > 0.0, "period must be positive");
}

double turing_period(double alpha, int beta) {
  const double q2 = (2.0 - alpha) / (-static_cast<double>(beta));
  require(q2 > 0.0, "no Turing wavenumber for these parameters");
  return 2.0 * std::numbers::pi / std::sqrt(q2);
}

RealPairField kerr(const RealPairField& u) {
  RealPairField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = cd(0.0, std::norm(u[i])) * u[i];
  return out;
}

RealPairField kerr_derivative(const RealPairField& base, const RealPairField& v) {
  require(base.grid() == v.grid(), "kerr derivative: grid mismatch");
  RealPairField out(v.grid());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const cd b = base[i];
    out[i] = cd(0.0, 1.0) * (2.0 * std::norm(b) * v[i] + b * b * std::conj(v[i]));
  }
  return out;
}

RealPairField stationary_residual(const RealPairField& u, const WaveParameters& p) {
  const RealPairField uxx = spectral_derivative(u, 2);
  RealPairField out(u.grid());
  const cd i(0.0, 1.0);
  for (std::size_t j = 0; j < u.size(); ++j)
    out[j] = -static_cast<double>(p.beta) * i * uxx[j] - (1.0 + i * p.alpha) * u[j] +
             i * std::norm(u[j]) * u[j] + p.forcing;
  return out;
}

RealPairField apply_linearization(const RealPairField& base, const RealPairField& f,
                                  const WaveParameters& p) {
  const RealPairField fxx = spectral_derivative(f, 2);
  RealPairField out = kerr_derivative(base, f);
  const cd i(0.0, 1.0);
  for (std::size_t j = 0; j < f.size(); ++j)
    out[j] += i * (-static_cast<double>(p.beta) * fxx[j] - p.alpha * f[j]) - f[j];
  return out;
}

cd linear_symbol(double k, const WaveParameters& p) {
  return cd(-1.0, static_cast<double>(p.beta) * k * k - p.alpha);
}

}  // namespace lle
