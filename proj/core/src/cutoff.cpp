#include "lle/cutoff.hpp"

#include <cmath>

namespace lle {
namespace {

double bump(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double bump_derivative(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }

}  // namespace

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = bump(s), b = bump(1.0 - s);
  return a / (a + b);
}

double smooth_step_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double a = bump(s), b = bump(1.0 - s);
  const double da = bump_derivative(s), db = -bump_derivative(1.0 - s);
  return (da * b - a * db) / ((a + b) * (a + b));
}

double temporal_cutoff(double t) { return smooth_step(t - 1.0); }
double temporal_cutoff_derivative(double t) { return smooth_step_derivative(t - 1.0); }

double frequency_cutoff(double xi, double xi0) {
  if (xi0 <= 0.0) return 0.0;
  const double half = 0.5 * xi0;
  return 1.0 - smooth_step((std::abs(xi) - half) / half);
}

}  // namespace lle
