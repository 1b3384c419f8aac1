#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lle/grid.hpp"
#include "lle/parameters.hpp"
#include "lle/waves.hpp"

namespace lle {

// Fourier-basis matrix of L(xi) on one period. Basis index a < n holds the u_r coefficient of
// label first_label + a, index n + a the u_i coefficient of the same label.
struct LinearizationMatrix {
  double xi = 0.0;
  double period = 0.0;
  long first_label = 0;
  Eigen::MatrixXcd matrix;
};

// Labels with xi + 2 pi l / T inside [-pi/h, pi/h).
long first_label(double xi, std::size_t n);

LinearizationMatrix assemble_bloch(const WaveProfile& wave, double xi);
// Same construction for an arbitrary periodic coefficient field; its grid length is the period.
LinearizationMatrix assemble_periodic_operator(const RealPairField& base,
                                               const WaveParameters& params, double xi);

// Coefficient vector of a one-period field in the xi = 0 basis and back.
Eigen::VectorXcd to_fourier_vector(const RealPairField& f);
RealPairField from_fourier_vector(const PeriodicGrid& cell, const Eigen::VectorXcd& v);

// Discrete Bloch transform on an M-cell grid: entry m + M/2 is the fiber vector of xi_m = 2 pi m / L.
std::vector<Eigen::VectorXcd> bloch_decompose(const RealPairField& g);
RealPairField bloch_synthesize(const PeriodicGrid& full, const std::vector<Eigen::VectorXcd>& fibers);
// The antilinear map relating fibers at xi and -xi: label l -> -l with complex conjugation.
Eigen::VectorXcd reflect_fiber(const Eigen::VectorXcd& v);

struct BlochOptions {
  double kernel_tol = 1e-8;
  double spec_tol = 1e-7;
  double fit_tol_factor = 1e-3;  // fit_tol = factor * delta0
  double min_overlap = 0.5;
  unsigned threads = 1;
};

struct CurveSample {
  double xi = 0.0;
  cd lambda;
};

struct BlochSpectrumReport {
  double period = 0.0;
  std::size_t points_per_period = 0;
  std::vector<double> xi_grid;
  std::vector<std::vector<cd>> eigenvalues;  // per xi, sorted by decreasing real part
  double theta_fit = 0.0;
  double theta_least_squares = 0.0;
  double theta_global = 0.0;
  double gap_delta0 = 0.0;
  bool d1_ok = false;
  bool d2_ok = false;
  bool d3_ok = false;
  std::optional<cd> d1_witness;
  double d1_witness_xi = 0.0;
  double d2_slack = 0.0;
  std::vector<CurveSample> critical_curve;  // |xi| <= xi0
  std::vector<CurveSample> tracked_curve;   // every tracked sample
  double cutoff_xi0 = 0.0;
  double kernel_residual = 0.0;  // ||L(0) phi'|| / ||phi'||
  cd zero_eigenvalue;
  std::size_t near_zero_count = 0;
  double projector_overlap = 0.0;  // |<left, right>| / (|left| |right|) of the zero mode
  cd curve_slope_at_zero;
  double kernel_tol = 0.0;
  double spec_tol = 0.0;
  double fit_tol = 0.0;
  std::string notes;

  bool assumptions_hold() const { return d1_ok && d2_ok && d3_ok; }
  double max_real_part(std::size_t xi_index, bool skip_kernel) const;
};

BlochSpectrumReport verify_assumptions(const WaveProfile& wave, std::size_t xi_count,
                                       const BlochOptions& options = {});

struct ZeroModeData {
  RealPairField phi_prime;
  RealPairField adjoint_mode;
  double normalization_check = 0.0;
  double adjoint_residual = 0.0;  // ||L(0)^* adjoint||
};

ZeroModeData compute_zero_mode(const WaveProfile& wave);
double projection_coefficient(const ZeroModeData& zm, const RealPairField& g);
RealPairField projection_pi0(const ZeroModeData& zm, const RealPairField& g);

// exp(M t) through an eigendecomposition, or scaled-and-squared exponentials when the
// eigenvector basis is too ill-conditioned.
class FiberPropagator {
 public:
  explicit FiberPropagator(const Eigen::MatrixXcd& matrix);
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x, double t) const;
  bool uses_matrix_exponential() const noexcept { return use_expm_; }
  const Eigen::VectorXcd& eigenvalues() const noexcept { return values_; }

 private:
  Eigen::MatrixXcd matrix_;
  Eigen::VectorXcd values_;
  Eigen::MatrixXcd vectors_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> inverse_;
  bool use_expm_ = false;
};

class PeriodicSemigroup {
 public:
  PeriodicSemigroup(const WaveProfile& wave, const ZeroModeData& zm);
  // exp(L(0) t) g, or S1(t) g = (exp(L(0) t) - chi(t) Pi(0)) g.
  RealPairField apply(const RealPairField& g, double t, bool subtract_projection) const;
  bool uses_matrix_exponential() const noexcept { return propagator_.uses_matrix_exponential(); }

 private:
  PeriodicGrid cell_;
  ZeroModeData zm_;
  FiberPropagator propagator_;
};

RealPairField apply_semigroup_periodic(const WaveProfile& wave, const ZeroModeData& zm,
                                       const RealPairField& g, double t, bool subtract_projection);

// Critical-mode split exp(L0 t) g = S2(t) g + phi' s_p(t) g on an M-cell domain.
class CriticalModeSplit {
 public:
  struct Mode {
    long m = 0;
    double xi = 0.0;
    double weight = 0.0;  // frequency cutoff rho(xi_m)
    cd lambda;
    Eigen::VectorXcd right;  // <phi', right> = ||phi'||^2
    Eigen::VectorXcd left;   // <left, right> = 1
  };

  CriticalModeSplit(const WaveProfile& wave, const BlochSpectrumReport& report, std::size_t num_cells);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  const std::vector<Mode>& modes() const noexcept { return modes_; }
  double cutoff_xi0() const noexcept { return xi0_; }

  // <left_m, g_m> for every active mode.
  std::vector<cd> project(const RealPairField& g) const;
  // Sum over modes of e^{i xi_m x} (i xi_m)^order c_m, real part.
  ScalarField synthesize(const std::vector<cd>& coefficients, int order = 0) const;
  // Temporal kernel weight_m chi(t) e^{lambda_m t} and its time derivative.
  std::vector<cd> kernel(double t, bool time_derivative = false) const;

  ScalarField apply_sp(const RealPairField& g, double t) const;
  RealPairField apply_semigroup(const RealPairField& g, double t) const;
  std::pair<ScalarField, RealPairField> split(const RealPairField& g, double t) const;

 private:
  const FiberPropagator& fiber(long m) const;

  WaveParameters params_;
  RealPairField profile_;
  RealPairField phi_prime_full_;
  PeriodicGrid grid_;
  double xi0_ = 0.0;
  std::vector<Mode> modes_;
  mutable std::mutex fiber_mutex_;
  mutable std::vector<std::unique_ptr<FiberPropagator>> fibers_;
};

std::pair<ScalarField, RealPairField> apply_sp_and_s2(const CriticalModeSplit& split,
                                                      const RealPairField& g, double t);

struct UnionCheck {
  double max_mismatch = 0.0;
  std::size_t matched = 0;
};

// Matches the full-domain spectrum of L0 on M cells against the union of fiber spectra.
UnionCheck check_union_property(const WaveProfile& wave, std::size_t num_cells);

}  // namespace lle
