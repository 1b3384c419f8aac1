#pragma once

#include <span>
#include <string>
#include <vector>

#include "lle/grid.hpp"

namespace lle {

enum class NormKind { L2, H1, H2, H3, H4, Linf };

NormKind parse_norm_kind(const std::string& name);

CVec spectrum(const RealPairField& f);
RealPairField from_spectrum(const PeriodicGrid& grid, const CVec& coefficients);

// Derivative of Fourier coefficients in place; the Nyquist amplitude is dropped for odd orders.
void differentiate_spectrum(CVec& coefficients, const PeriodicGrid& grid, int order);

RealPairField spectral_derivative(const RealPairField& f, int order);
ScalarField spectral_derivative(const ScalarField& f, int order);

double norm(const RealPairField& f, NormKind kind);
double norm(const ScalarField& f, NormKind kind);
// Sum over j <= k of the squared L2 norms of the j-th derivatives.
double sobolev_norm_squared(const RealPairField& f, int k);
double sobolev_norm_squared(const ScalarField& f, int k);
// L2 norm evaluated from the Fourier coefficients (Parseval).
double l2_norm_spectral(const RealPairField& f);

// Real L2 pairing h * sum(f_r g_r + f_i g_i).
double inner_product(const RealPairField& f, const RealPairField& g);

// Trigonometric interpolant evaluated anywhere on the line (periodic wrap).
std::vector<cd> interpolate(const RealPairField& f, std::span<const double> points);
std::vector<double> interpolate(const ScalarField& f, std::span<const double> points);

enum class EvaluationMethod { Automatic, Exact, Local };

// Evaluates a periodic field at many off-grid points. Exact sums the Fourier series;
// Local interpolates a 4x spectrally refined copy with a 16-point Lagrange stencil.
class PointEvaluator {
 public:
  PointEvaluator(const RealPairField& f, EvaluationMethod method = EvaluationMethod::Automatic);
  cd operator()(double x) const;
  std::vector<cd> evaluate(std::span<const double> points) const;
  EvaluationMethod method() const noexcept { return method_; }

 private:
  PeriodicGrid grid_;
  EvaluationMethod method_;
  CVec coefficients_;
  CVec fine_;
  double fine_h_ = 0.0;
};

// f(x_i + shift_i) on the grid of `target`; f may live on a single period when the target spans M cells.
RealPairField compose(const RealPairField& f, const PeriodicGrid& target, const ScalarField& shift,
                      double uniform_shift = 0.0,
                      EvaluationMethod method = EvaluationMethod::Automatic);

// Exact translation f(x + s) by a Fourier phase factor.
RealPairField translate(const RealPairField& f, double s);

RealPairField tile(const RealPairField& cell_field, const PeriodicGrid& full);
ScalarField tile(const ScalarField& cell_field, const PeriodicGrid& full);
// Spectral zero-padding or truncation to a grid with a different number of points.
RealPairField resample(const RealPairField& f, std::size_t num_points);

// 2/3-rule mask: keeps |j| <= N/3.
std::vector<double> dealias_mask(std::size_t n);

}  // namespace lle
