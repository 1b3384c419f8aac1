#include <cmath>
#include <numbers>
#include <sstream>

#include "lle/bloch.hpp"
#include "lle/cutoff.hpp"
#include "lle/error.hpp"
#include "lle/fft.hpp"
#include "lle/spectral.hpp"

namespace lle {
namespace {

struct Eigenpair {
  cd lambda;
  Eigen::VectorXcd right;
  Eigen::VectorXcd left;
};

// Inverse iteration from a nearby shift, refined once with the Rayleigh quotient.
Eigenpair refine_eigenpair(const Eigen::MatrixXcd& a, cd shift, Eigen::VectorXcd right,
                           Eigen::VectorXcd left) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  Eigenpair out;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a - shift * id);
    for (int k = 0; k < (pass == 0 ? 12 : 3); ++k) {
      right = lu.solve(right);
      right /= right.norm();
      left = lu.adjoint().solve(left);
      left /= left.norm();
    }
    out.lambda = left.dot(a * right) / left.dot(right);
    shift = out.lambda + cd(1e-11, 0.0);
  }
  out.right = right;
  out.left = left;
  return out;
}

}  // namespace

CriticalModeSplit::CriticalModeSplit(const WaveProfile& wave, const BlochSpectrumReport& report,
                                     std::size_t num_cells)
    : params_(wave.params),
      profile_(wave.profile),
      grid_(wave.grid().with_cells(num_cells)),
      xi0_(report.cutoff_xi0) {
  if (!report.assumptions_hold())
    fail(ErrorCode::AssumptionsNotMet,
         "critical-mode split requires (D1)-(D3); the spectrum report does not confirm them");
  require(num_cells >= 2 && num_cells % 2 == 0, "critical-mode split: number of cells must be even");
  phi_prime_full_ = tile(wave.derivative, grid_);
  fibers_.resize(num_cells);
  const double period = params_.period;
  const Eigen::VectorXcd phi_prime = to_fourier_vector(wave.derivative);
  const double phi_prime_sq = period * phi_prime.squaredNorm();

  std::vector<Mode> positive;
  Eigen::VectorXcd right = phi_prime / phi_prime.norm();
  Eigen::VectorXcd left = right;
  cd shift = report.zero_eigenvalue;
  for (long m = 0;; ++m) {
    const double xi = 2.0 * std::numbers::pi * static_cast<double>(m) / grid_.length();
    const double weight = frequency_cutoff(xi, xi0_);
    if (weight <= 0.0 || m >= static_cast<long>(num_cells / 2)) break;
    const auto op = assemble_periodic_operator(profile_, params_, xi);
    Eigenpair pair = refine_eigenpair(op.matrix, shift + cd(1e-9, 0.0), right, left);
    if (std::abs(std::abs(right.dot(pair.right)) - 1.0) > 0.5) {
      std::ostringstream os;
      os << "critical-mode continuation lost the curve at xi=" << xi;
      fail(ErrorCode::AmbiguousTracking, os.str());
    }
    right = pair.right;
    left = pair.left;
    shift = pair.lambda;
    Mode mode;
    mode.m = m;
    mode.xi = xi;
    mode.weight = weight;
    mode.lambda = m == 0 ? cd(0.0, 0.0) : pair.lambda;
    mode.right = pair.right * (phi_prime_sq / (period * phi_prime.dot(pair.right)));
    mode.left = pair.left / std::conj(period * pair.left.dot(mode.right));
    positive.push_back(std::move(mode));
  }
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
    if (it->m == 0) continue;
    Mode mirror;
    mirror.m = -it->m;
    mirror.xi = -it->xi;
    mirror.weight = it->weight;
    mirror.lambda = std::conj(it->lambda);
    mirror.right = reflect_fiber(it->right);
    mirror.left = reflect_fiber(it->left);
    modes_.push_back(std::move(mirror));
  }
  for (auto& mode : positive) modes_.push_back(std::move(mode));
}

std::vector<cd> CriticalModeSplit::project(const RealPairField& g) const {
  require(g.grid() == grid_, "critical-mode split: field grid mismatch");
  const auto fibers = bloch_decompose(g);
  const long half_m = static_cast<long>(grid_.num_cells() / 2);
  std::vector<cd> out(modes_.size());
  for (std::size_t k = 0; k < modes_.size(); ++k)
    out[k] = params_.period * modes_[k].left.dot(fibers[static_cast<std::size_t>(modes_[k].m + half_m)]);
  return out;
}

ScalarField CriticalModeSplit::synthesize(const std::vector<cd>& coefficients, int order) const {
  require(coefficients.size() == modes_.size(), "critical-mode split: coefficient count mismatch");
  const std::size_t n = grid_.num_points();
  CVec spec(n, 0.0);
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const long m = modes_[k].m;
    const std::size_t slot = static_cast<std::size_t>((m + static_cast<long>(n)) % static_cast<long>(n));
    spec[slot] += coefficients[k] * std::pow(cd(0.0, modes_[k].xi), order);
  }
  const CVec values = fft_inverse(spec);
  ScalarField out(grid_);
  for (std::size_t i = 0; i < n; ++i) out[i] = values[i].real();
  return out;
}

std::vector<cd> CriticalModeSplit::kernel(double t, bool time_derivative) const {
  const double chi = temporal_cutoff(t);
  const double dchi = temporal_cutoff_derivative(t);
  std::vector<cd> out(modes_.size());
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const auto& mode = modes_[k];
    const cd e = std::exp(mode.lambda * t);
    out[k] = mode.weight * (time_derivative ? (dchi + mode.lambda * chi) * e : chi * e);
  }
  return out;
}

ScalarField CriticalModeSplit::apply_sp(const RealPairField& g, double t) const {
  std::vector<cd> c = project(g);
  const auto k = kernel(t);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= k[i];
  return synthesize(c);
}

const FiberPropagator& CriticalModeSplit::fiber(long m) const {
  const long half_m = static_cast<long>(grid_.num_cells() / 2);
  std::lock_guard<std::mutex> lock(fiber_mutex_);
  auto& slot = fibers_[static_cast<std::size_t>(m + half_m)];
  if (!slot) {
    const double xi = 2.0 * std::numbers::pi * static_cast<double>(m) / grid_.length();
    slot = std::make_unique<FiberPropagator>(assemble_periodic_operator(profile_, params_, xi).matrix);
  }
  return *slot;
}

RealPairField CriticalModeSplit::apply_semigroup(const RealPairField& g, double t) const {
  require(g.grid() == grid_, "critical-mode split: field grid mismatch");
  auto fibers = bloch_decompose(g);
  const long half_m = static_cast<long>(grid_.num_cells() / 2);
  for (long m = -half_m; m < half_m; ++m) {
    auto& v = fibers[static_cast<std::size_t>(m + half_m)];
    if (m < 0 && m != -half_m)
      v = reflect_fiber(fiber(-m).apply(reflect_fiber(v), t));
    else
      v = fiber(m).apply(v, t);
  }
  return bloch_synthesize(grid_, fibers);
}

std::pair<ScalarField, RealPairField> CriticalModeSplit::split(const RealPairField& g, double t) const {
  ScalarField sp = apply_sp(g, t);
  RealPairField remainder = apply_semigroup(g, t) - multiply(sp, phi_prime_full_);
  return {std::move(sp), std::move(remainder)};
}

std::pair<ScalarField, RealPairField> apply_sp_and_s2(const CriticalModeSplit& split,
                                                      const RealPairField& g, double t) {
  require(t >= 0.0, "apply_sp_and_s2: t must be nonnegative");
  return split.split(g, t);
}

}  // namespace lle
