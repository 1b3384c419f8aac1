#include "lle/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lle/error.hpp"

namespace lle {

PeriodicGrid::PeriodicGrid(std::size_t num_points, double cell_period, std::size_t num_cells)
    : n_(num_points), m_(num_cells), period_(cell_period) {
  require(n_ > 0 && n_ % 2 == 0, "grid: number of points must be positive and even");
  require(m_ > 0, "grid: number of cells must be positive");
  require(n_ % m_ == 0, "grid: points per cell must be an integer");
  require(std::isfinite(period_) && period_ > 0.0, "grid: cell period must be positive");
  length_ = period_ * static_cast<double>(m_);
  h_ = length_ / static_cast<double>(n_);
}

long PeriodicGrid::mode(std::size_t i) const noexcept {
  const long j = static_cast<long>(i);
  const long n = static_cast<long>(n_);
  return j < n / 2 ? j : j - n;
}

double PeriodicGrid::wavenumber(std::size_t i) const noexcept {
  return 2.0 * std::numbers::pi * static_cast<double>(mode(i)) / length_;
}

RealPairField::RealPairField(const PeriodicGrid& grid) : grid_(grid), v_(grid.num_points()) {}

RealPairField::RealPairField(const PeriodicGrid& grid, CVec values)
    : grid_(grid), v_(std::move(values)) {
  require(v_.size() == grid_.num_points(), "field: sample count does not match grid");
}

RealPairField RealPairField::from_components(const PeriodicGrid& grid, std::span<const double> re,
                                             std::span<const double> im) {
  require(re.size() == grid.num_points() && im.size() == grid.num_points(),
          "field: component length does not match grid");
  RealPairField out(grid);
  for (std::size_t i = 0; i < re.size(); ++i) out.v_[i] = cd(re[i], im[i]);
  return out;
}

std::vector<double> RealPairField::component(int c) const {
  std::vector<double> out(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) out[i] = c == 0 ? v_[i].real() : v_[i].imag();
  return out;
}

bool RealPairField::is_finite() const noexcept {
  return std::all_of(v_.begin(), v_.end(),
                     [](cd z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

RealPairField& RealPairField::operator+=(const RealPairField& o) {
  require(o.grid_ == grid_, "field: grid mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

RealPairField& RealPairField::operator-=(const RealPairField& o) {
  require(o.grid_ == grid_, "field: grid mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

RealPairField& RealPairField::operator*=(double s) {
  for (auto& z : v_) z *= s;
  return *this;
}

ScalarField::ScalarField(const PeriodicGrid& grid) : grid_(grid), v_(grid.num_points(), 0.0) {}

ScalarField::ScalarField(const PeriodicGrid& grid, std::vector<double> values)
    : grid_(grid), v_(std::move(values)) {
  require(v_.size() == grid_.num_points(), "scalar field: sample count does not match grid");
}

double ScalarField::max_abs() const noexcept {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require(o.grid_ == grid_, "scalar field: grid mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require(o.grid_ == grid_, "scalar field: grid mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (auto& x : v_) x *= s;
  return *this;
}

RealPairField multiply(const ScalarField& a, const RealPairField& f) {
  require(a.grid() == f.grid(), "multiply: grid mismatch");
  RealPairField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = a[i] * f[i];
  return out;
}

RealPairField multiply_i(const RealPairField& f) {
  RealPairField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = cd(-f[i].imag(), f[i].real());
  return out;
}

}  // namespace lle
