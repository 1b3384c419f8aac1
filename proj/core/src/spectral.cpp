#include "lle/spectral.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "lle/error.hpp"
#include "lle/fft.hpp"

namespace lle {
namespace {

constexpr std::size_t kExactEvaluationLimit = 1024;
constexpr std::size_t kRefinement = 4;
constexpr int kStencil = 16;

CVec to_complex(const ScalarField& f) {
  CVec out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
  return out;
}

double sobolev_from_spectrum(const CVec& c, const PeriodicGrid& grid, int k) {
  const std::size_t n = c.size();
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (j % 2 == 1 && grid.mode(i) == -static_cast<long>(n / 2)) continue;
      s += std::pow(grid.wavenumber(i), 2 * j) * std::norm(c[i]);
    }
    total += grid.length() * s;
  }
  return total;
}

int sobolev_index(NormKind kind) {
  switch (kind) {
    case NormKind::H1: return 1;
    case NormKind::H2: return 2;
    case NormKind::H3: return 3;
    case NormKind::H4: return 4;
    default: return 0;
  }
}

}  // namespace

NormKind parse_norm_kind(const std::string& name) {
  std::string s;
  for (char ch : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (s == "l2") return NormKind::L2;
  if (s == "h1") return NormKind::H1;
  if (s == "h2") return NormKind::H2;
  if (s == "h3") return NormKind::H3;
  if (s == "h4") return NormKind::H4;
  if (s == "linf") return NormKind::Linf;
  fail(ErrorCode::InvalidArgument, "unknown norm kind '" + name + "'");
}

CVec spectrum(const RealPairField& f) { return fft_forward(f.values()); }

RealPairField from_spectrum(const PeriodicGrid& grid, const CVec& coefficients) {
  return RealPairField(grid, fft_inverse(coefficients));
}

void differentiate_spectrum(CVec& c, const PeriodicGrid& grid, int order) {
  if (order < 0 || order > 4) fail(ErrorCode::UnsupportedOrder, "derivative order must be in [0, 4]");
  if (order == 0) return;
  const long nyquist = -static_cast<long>(grid.num_points() / 2);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (order % 2 == 1 && grid.mode(i) == nyquist) {
      c[i] = 0.0;
      continue;
    }
    c[i] *= std::pow(cd(0.0, grid.wavenumber(i)), order);
  }
}

RealPairField spectral_derivative(const RealPairField& f, int order) {
  if (order < 0 || order > 4) fail(ErrorCode::UnsupportedOrder, "derivative order must be in [0, 4]");
  if (order == 0) return f;
  CVec c = spectrum(f);
  differentiate_spectrum(c, f.grid(), order);
  return from_spectrum(f.grid(), c);
}

ScalarField spectral_derivative(const ScalarField& f, int order) {
  if (order < 0 || order > 4) fail(ErrorCode::UnsupportedOrder, "derivative order must be in [0, 4]");
  if (order == 0) return f;
  CVec c = fft_forward(to_complex(f));
  differentiate_spectrum(c, f.grid(), order);
  CVec v = fft_inverse(c);
  ScalarField out(f.grid());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
  return out;
}

double sobolev_norm_squared(const RealPairField& f, int k) {
  return sobolev_from_spectrum(spectrum(f), f.grid(), k);
}

double sobolev_norm_squared(const ScalarField& f, int k) {
  return sobolev_from_spectrum(fft_forward(to_complex(f)), f.grid(), k);
}

double l2_norm_spectral(const RealPairField& f) {
  return std::sqrt(sobolev_norm_squared(f, 0));
}

double norm(const RealPairField& f, NormKind kind) {
  if (kind == NormKind::Linf) {
    double m = 0.0;
    for (cd z : f.values()) m = std::max(m, std::abs(z));
    return m;
  }
  if (kind == NormKind::L2) {
    double s = 0.0;
    for (cd z : f.values()) s += std::norm(z);
    return std::sqrt(f.grid().spacing() * s);
  }
  return std::sqrt(sobolev_norm_squared(f, sobolev_index(kind)));
}

double norm(const ScalarField& f, NormKind kind) {
  if (kind == NormKind::Linf) return f.max_abs();
  if (kind == NormKind::L2) {
    double s = 0.0;
    for (double x : f.values()) s += x * x;
    return std::sqrt(f.grid().spacing() * s);
  }
  return std::sqrt(sobolev_norm_squared(f, sobolev_index(kind)));
}

double inner_product(const RealPairField& f, const RealPairField& g) {
  require(f.grid() == g.grid(), "inner product: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    s += f[i].real() * g[i].real() + f[i].imag() * g[i].imag();
  return f.grid().spacing() * s;
}

PointEvaluator::PointEvaluator(const RealPairField& f, EvaluationMethod method)
    : grid_(f.grid()), method_(method) {
  if (method_ == EvaluationMethod::Automatic)
    method_ = grid_.num_points() <= kExactEvaluationLimit ? EvaluationMethod::Exact
                                                           : EvaluationMethod::Local;
  if (method_ == EvaluationMethod::Exact) {
    coefficients_ = spectrum(f);
  } else {
    fine_ = resample(f, grid_.num_points() * kRefinement).values();
    fine_h_ = grid_.length() / static_cast<double>(fine_.size());
  }
}

cd PointEvaluator::operator()(double x) const {
  const double length = grid_.length();
  if (method_ == EvaluationMethod::Exact) {
    const std::size_t n = coefficients_.size();
    const double theta = 2.0 * std::numbers::pi * x / length;
    const cd z = std::polar(1.0, theta);
    cd acc = coefficients_[0];
    cd zp = 1.0;
    for (std::size_t j = 1; j < n / 2; ++j) {
      zp = (j % 32 == 0) ? std::polar(1.0, theta * static_cast<double>(j)) : zp * z;
      acc += coefficients_[j] * zp + coefficients_[n - j] * std::conj(zp);
    }
    acc += coefficients_[n / 2] * std::cos(theta * static_cast<double>(n / 2));
    return acc;
  }
  const long nf = static_cast<long>(fine_.size());
  double y = std::fmod(x, length);
  if (y < 0) y += length;
  y /= fine_h_;
  const long i0 = static_cast<long>(std::floor(y));
  const double frac = y - static_cast<double>(i0);
  if (frac == 0.0) return fine_[static_cast<std::size_t>(((i0 % nf) + nf) % nf)];
  const int half = kStencil / 2 - 1;
  // Barycentric weights for equispaced nodes: (-1)^j binom(p-1, j).
  static const std::vector<double> weights = [] {
    std::vector<double> w(kStencil);
    double b = 1.0;
    for (int j = 0; j < kStencil; ++j) {
      w[j] = (j % 2 == 0 ? 1.0 : -1.0) * b;
      b = b * static_cast<double>(kStencil - 1 - j) / static_cast<double>(j + 1);
    }
    return w;
  }();
  const double t = frac + half;
  cd num = 0.0;
  double den = 0.0;
  for (int j = 0; j < kStencil; ++j) {
    const long idx = ((i0 - half + j) % nf + nf) % nf;
    const double c = weights[j] / (t - j);
    num += c * fine_[static_cast<std::size_t>(idx)];
    den += c;
  }
  return num / den;
}

std::vector<cd> PointEvaluator::evaluate(std::span<const double> points) const {
  std::vector<cd> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = (*this)(points[i]);
  return out;
}

std::vector<cd> interpolate(const RealPairField& f, std::span<const double> points) {
  return PointEvaluator(f, EvaluationMethod::Exact).evaluate(points);
}

std::vector<double> interpolate(const ScalarField& f, std::span<const double> points) {
  RealPairField g(f.grid(), to_complex(f));
  auto values = PointEvaluator(g, EvaluationMethod::Exact).evaluate(points);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
  return out;
}

RealPairField compose(const RealPairField& f, const PeriodicGrid& target, const ScalarField& shift,
                      double uniform_shift, EvaluationMethod method) {
  const bool has_shift = shift.size() > 0;
  if (has_shift) require(shift.grid() == target, "compose: shift grid must match target grid");
  PointEvaluator eval(f, method);
  RealPairField out(target);
  for (std::size_t i = 0; i < target.num_points(); ++i)
    out[i] = eval(target.x(i) + uniform_shift + (has_shift ? shift[i] : 0.0));
  return out;
}

RealPairField translate(const RealPairField& f, double s) {
  CVec c = spectrum(f);
  const auto& grid = f.grid();
  const long nyquist = -static_cast<long>(grid.num_points() / 2);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k = grid.wavenumber(i);
    c[i] *= grid.mode(i) == nyquist ? cd(std::cos(k * s)) : std::polar(1.0, k * s);
  }
  return from_spectrum(grid, c);
}

RealPairField tile(const RealPairField& cell_field, const PeriodicGrid& full) {
  const std::size_t n = cell_field.size();
  require(full.points_per_cell() == n, "tile: cell grid does not match the full grid");
  RealPairField out(full);
  for (std::size_t i = 0; i < full.num_points(); ++i) out[i] = cell_field[i % n];
  return out;
}

ScalarField tile(const ScalarField& cell_field, const PeriodicGrid& full) {
  const std::size_t n = cell_field.size();
  require(full.points_per_cell() == n, "tile: cell grid does not match the full grid");
  ScalarField out(full);
  for (std::size_t i = 0; i < full.num_points(); ++i) out[i] = cell_field[i % n];
  return out;
}

RealPairField resample(const RealPairField& f, std::size_t m) {
  const std::size_t n = f.size();
  const auto& g = f.grid();
  PeriodicGrid target(m, g.cell_period(), g.num_cells());
  if (m == n) return RealPairField(target, f.values());
  const CVec c = spectrum(f);
  CVec d(m, 0.0);
  if (m > n) {
    for (std::size_t i = 1; i < n / 2; ++i) {
      d[i] = c[i];
      d[m - i] = c[n - i];
    }
    d[0] = c[0];
    d[n / 2] = 0.5 * c[n / 2];
    d[m - n / 2] = 0.5 * c[n / 2];
  } else {
    for (std::size_t i = 1; i < m / 2; ++i) {
      d[i] = c[i];
      d[m - i] = c[n - i];
    }
    d[0] = c[0];
    d[m / 2] = c[m / 2] + c[n - m / 2];
  }
  return RealPairField(target, fft_inverse(d));
}

std::vector<double> dealias_mask(std::size_t n) {
  std::vector<double> mask(n, 0.0);
  const long nn = static_cast<long>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long j = static_cast<long>(i) < nn / 2 ? static_cast<long>(i) : static_cast<long>(i) - nn;
    mask[i] = 3 * std::abs(j) <= nn ? 1.0 : 0.0;
  }
  return mask;
}

}  // namespace lle
