#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lle {

using cd = std::complex<double>;
using CVec = std::vector<cd>;

// Uniform grid on [0, M*T) with N points; the one-period grid is the M = 1 case.
class PeriodicGrid {
 public:
  PeriodicGrid() = default;
  PeriodicGrid(std::size_t num_points, double cell_period, std::size_t num_cells = 1);

  std::size_t num_points() const noexcept { return n_; }
  std::size_t num_cells() const noexcept { return m_; }
  std::size_t points_per_cell() const noexcept { return n_ / m_; }
  double cell_period() const noexcept { return period_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return h_; }

  double x(std::size_t i) const noexcept { return h_ * static_cast<double>(i); }
  // Signed mode number j of FFT slot i, j in [-N/2, N/2).
  long mode(std::size_t i) const noexcept;
  double wavenumber(std::size_t i) const noexcept;

  PeriodicGrid cell_grid() const { return PeriodicGrid(n_ / m_, period_, 1); }
  PeriodicGrid with_cells(std::size_t num_cells) const {
    return PeriodicGrid(points_per_cell() * num_cells, period_, num_cells);
  }
  PeriodicGrid refined(std::size_t factor) const { return PeriodicGrid(n_ * factor, period_, m_); }

  bool operator==(const PeriodicGrid&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 1;
  double period_ = 0.0;
  double length_ = 0.0;
  double h_ = 0.0;
};

// Complex samples u_r + i u_i; the two real components are the real and imaginary parts.
class RealPairField {
 public:
  RealPairField() = default;
  explicit RealPairField(const PeriodicGrid& grid);
  RealPairField(const PeriodicGrid& grid, CVec values);
  static RealPairField from_components(const PeriodicGrid& grid, std::span<const double> re,
                                       std::span<const double> im);
  template <class F>
  static RealPairField sample(const PeriodicGrid& grid, F&& f) {
    RealPairField out(grid);
    for (std::size_t i = 0; i < grid.num_points(); ++i) out.v_[i] = cd(f(grid.x(i)));
    return out;
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return v_.size(); }
  cd operator[](std::size_t i) const { return v_[i]; }
  cd& operator[](std::size_t i) { return v_[i]; }
  const CVec& values() const noexcept { return v_; }
  CVec& values() noexcept { return v_; }
  std::vector<double> component(int c) const;
  bool is_finite() const noexcept;

  RealPairField& operator+=(const RealPairField& o);
  RealPairField& operator-=(const RealPairField& o);
  RealPairField& operator*=(double s);
  friend RealPairField operator+(RealPairField a, const RealPairField& b) { return a += b; }
  friend RealPairField operator-(RealPairField a, const RealPairField& b) { return a -= b; }
  friend RealPairField operator*(double s, RealPairField a) { return a *= s; }

 private:
  PeriodicGrid grid_;
  CVec v_;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const PeriodicGrid& grid);
  ScalarField(const PeriodicGrid& grid, std::vector<double> values);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  const std::vector<double>& values() const noexcept { return v_; }
  std::vector<double>& values() noexcept { return v_; }
  double max_abs() const noexcept;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  PeriodicGrid grid_;
  std::vector<double> v_;
};

// Pointwise products used throughout the modulation algebra.
RealPairField multiply(const ScalarField& a, const RealPairField& f);
RealPairField multiply_i(const RealPairField& f);  // the symplectic matrix J acts as multiplication by i

}  // namespace lle
