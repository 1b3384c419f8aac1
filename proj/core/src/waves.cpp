#include "lle/waves.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/Polynomials>

#include "lle/error.hpp"
#include "lle/operators.hpp"
#include "lle/spectral.hpp"

namespace lle {
namespace {

Eigen::MatrixXd derivative_matrix(const PeriodicGrid& grid, int order) {
  const std::size_t n = grid.num_points();
  Eigen::MatrixXd d(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    RealPairField e(grid);
    e[j] = 1.0;
    const RealPairField col = spectral_derivative(e, order);
    for (std::size_t i = 0; i < n; ++i) d(i, j) = col[i].real();
  }
  return d;
}

double l2(const RealPairField& f) { return norm(f, NormKind::L2); }

class StationarySystem {
 public:
  StationarySystem(const WaveParameters& params, const RealPairField& anchor)
      : params_(params),
        grid_(anchor.grid()),
        n_(grid_.num_points()),
        d1_(derivative_matrix(grid_, 1)),
        d2_(derivative_matrix(grid_, 2)),
        anchor_(anchor),
        anchor_slope_(spectral_derivative(anchor, 1)) {
    bordered_ = norm(anchor_slope_, NormKind::L2) > 1e-10 * std::max(1.0, l2(anchor));
  }

  bool bordered() const { return bordered_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(2 * n_ + (bordered_ ? 1 : 0)); }

  Eigen::VectorXd pack(const RealPairField& u, double c) const {
    Eigen::VectorXd x(size());
    for (std::size_t i = 0; i < n_; ++i) {
      x(i) = u[i].real();
      x(n_ + i) = u[i].imag();
    }
    if (bordered_) x(2 * n_) = c;
    return x;
  }

  RealPairField unpack(const Eigen::VectorXd& x) const {
    RealPairField u(grid_);
    for (std::size_t i = 0; i < n_; ++i) u[i] = cd(x(i), x(n_ + i));
    return u;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    const RealPairField u = unpack(x);
    RealPairField g = stationary_residual(u, params_);
    Eigen::VectorXd r(size());
    if (bordered_) {
      const double c = x(2 * n_);
      const RealPairField ux = spectral_derivative(u, 1);
      for (std::size_t i = 0; i < n_; ++i) g[i] += c * ux[i];
      r(2 * n_) = inner_product(anchor_slope_, u - anchor_);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      r(i) = g[i].real();
      r(n_ + i) = g[i].imag();
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    const auto n = static_cast<Eigen::Index>(n_);
    const RealPairField u = unpack(x);
    const double beta = params_.beta;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(size(), size());
    jac.block(0, n, n, n) = beta * d2_;
    jac.block(n, 0, n, n) = -beta * d2_;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = u[i].real(), b = u[i].imag();
      jac(i, i) += -1.0 - 2.0 * a * b;
      jac(i, n + i) += params_.alpha - (a * a + 3.0 * b * b);
      jac(n + i, i) += -params_.alpha + 3.0 * a * a + b * b;
      jac(n + i, n + i) += -1.0 + 2.0 * a * b;
    }
    if (bordered_) {
      const double c = x(2 * n);
      jac.block(0, 0, n, n) += c * d1_;
      jac.block(n, n, n, n) += c * d1_;
      const RealPairField ux = spectral_derivative(u, 1);
      const double h = grid_.spacing();
      for (Eigen::Index i = 0; i < n; ++i) {
        jac(i, 2 * n) = ux[i].real();
        jac(n + i, 2 * n) = ux[i].imag();
        jac(2 * n, i) = h * anchor_slope_[i].real();
        jac(2 * n, n + i) = h * anchor_slope_[i].imag();
      }
    }
    return jac;
  }

  double residual_size(const Eigen::VectorXd& r) const {
    return std::sqrt(grid_.spacing() * r.head(2 * n_).squaredNorm() +
                     (bordered_ ? r(2 * n_) * r(2 * n_) : 0.0));
  }

 private:
  WaveParameters params_;
  PeriodicGrid grid_;
  std::size_t n_;
  Eigen::MatrixXd d1_, d2_;
  RealPairField anchor_, anchor_slope_;
  bool bordered_ = false;
};

std::string rcond_message(const char* what, double rcond) {
  std::ostringstream os;
  os << what << " (reciprocal condition estimate " << rcond << ")";
  return os.str();
}

}  // namespace

std::vector<ConstantState> homogeneous_states(const WaveParameters& p) {
  require(std::isfinite(p.forcing) && p.forcing >= 0.0, "forcing must be nonnegative");
  const double f2 = p.forcing * p.forcing;
  if (f2 == 0.0) return {ConstantState{0.0, cd(0.0)}};
  // rho^3 - 2 alpha rho^2 + (1 + alpha^2) rho - F^2 = 0
  Eigen::Vector4d coeffs(-f2, 1.0 + p.alpha * p.alpha, -2.0 * p.alpha, 1.0);
  Eigen::PolynomialSolver<double, 3> solver(coeffs);
  std::vector<double> roots;
  for (const auto& z : solver.roots()) {
    double rho = z.real();
    if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z))) continue;
    for (int it = 0; it < 8; ++it) {
      const double g = rho * (1.0 + (p.alpha - rho) * (p.alpha - rho)) - f2;
      const double dg = 3.0 * rho * rho - 4.0 * p.alpha * rho + 1.0 + p.alpha * p.alpha;
      if (dg == 0.0) break;
      rho -= g / dg;
    }
    if (rho < 0.0) continue;
    if (std::none_of(roots.begin(), roots.end(),
                     [&](double r) { return std::abs(r - rho) < 1e-9 * std::max(1.0, rho); }))
      roots.push_back(rho);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<ConstantState> out;
  for (double rho : roots)
    out.push_back({rho, p.forcing / cd(1.0, p.alpha - rho)});
  return out;
}

bool WaveProfile::is_nonconstant(double tol) const {
  return norm(derivative, NormKind::Linf) > tol;
}

WaveProfile WaveProfile::from_samples(const WaveParameters& params, const RealPairField& profile) {
  WaveProfile w;
  w.params = params;
  w.profile = profile;
  w.derivative = spectral_derivative(profile, 1);
  w.second_derivative = spectral_derivative(profile, 2);
  w.residual_norm = norm(stationary_residual(profile, params), NormKind::L2);
  return w;
}

WaveProfile newton_wave(const RealPairField& guess, const WaveParameters& params,
                        const NewtonOptions& options) {
  params.validate();
  require(guess.grid().num_cells() == 1, "newton_wave: guess must live on one period");
  require(std::abs(guess.grid().cell_period() - params.period) <= 1e-12 * params.period,
          "newton_wave: guess period differs from parameters");
  StationarySystem system(params, guess);
  Eigen::VectorXd x = system.pack(guess, 0.0);
  Eigen::VectorXd r = system.residual(x);
  double res = system.residual_size(r);
  const double initial = res;
  NewtonReport report;
  report.bordered = system.bordered();
  while (res > options.tolerance) {
    if (report.iterations >= options.max_iterations)
      fail(ErrorCode::MaxIterations, "newton_wave: no convergence after " +
                                         std::to_string(report.iterations) + " iterations");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system.jacobian(x));
    report.rcond = lu.rcond();
    if (!(report.rcond > options.min_rcond))
      fail(ErrorCode::SingularJacobian, rcond_message("newton_wave: singular Jacobian", report.rcond));
    x -= lu.solve(r);
    ++report.iterations;
    r = system.residual(x);
    res = system.residual_size(r);
    if (!std::isfinite(res) || res > 1e6 * std::max(1.0, initial))
      fail(ErrorCode::MaxIterations, "newton_wave: iteration diverged");
  }
  WaveProfile wave = WaveProfile::from_samples(params, system.unpack(x));
  if (system.bordered()) report.phase_multiplier = x(x.size() - 1);
  wave.newton = report;
  return wave;
}

WaveProfile continuation(const WaveProfile& start, double target_forcing, int steps,
                         const ContinuationOptions& options) {
  require(steps >= 1, "continuation: steps must be positive");
  if (target_forcing == start.params.forcing) return start;
  const double df = (target_forcing - start.params.forcing) / steps;
  WaveProfile current = start;
  for (int s = 1; s <= steps; ++s) {
    StationarySystem system(current.params, current.profile);
    const Eigen::VectorXd x = system.pack(current.profile, current.newton.phase_multiplier);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system.jacobian(x));
    const double rcond = lu.rcond();
    const std::string where = "continuation step " + std::to_string(s) + ": ";
    if (!(rcond > options.fold_rcond))
      fail(ErrorCode::SingularJacobian, rcond_message((where + "Jacobian singular, fold suspected").c_str(), rcond));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(x.size());
    const auto n = static_cast<Eigen::Index>(current.profile.size());
    rhs.head(n).setConstant(-1.0);
    const RealPairField tangent = system.unpack(lu.solve(rhs));
    RealPairField predicted = current.profile + df * tangent;
    WaveParameters next_params = current.params;
    next_params.forcing = start.params.forcing + df * s;
    if (s == steps) next_params.forcing = target_forcing;
    WaveProfile next;
    try {
      next = newton_wave(predicted, next_params, options.newton);
    } catch (const Error& e) {
      fail(e.code(), where + e.what());
    }
    const double predictor = norm(df * tangent, NormKind::Linf);
    const double corrector = norm(next.profile - predicted, NormKind::Linf);
    if (corrector > predictor + 1e-8)
      fail(ErrorCode::SingularJacobian,
           rcond_message((where + "corrector left the branch, fold suspected").c_str(), rcond));
    current = std::move(next);
  }
  return current;
}

RealPairField turing_seed(const WaveParameters& params, std::size_t points, double amplitude) {
  const auto states = homogeneous_states(params);
  const cd base = states.back().value;
  PeriodicGrid grid(points, params.period, 1);
  return RealPairField::sample(grid, [&](double x) {
    return base + amplitude * std::cos(2.0 * std::numbers::pi * x / params.period);
  });
}

WaveProfile construct_wave(const WaveParameters& params, std::size_t points,
                           const std::vector<double>& seed_amplitudes) {
  std::string last = "no seed amplitudes given";
  for (double a : seed_amplitudes) {
    try {
      WaveProfile w = newton_wave(turing_seed(params, points, a), params);
      if (w.is_nonconstant(1e-6)) return w;
      last = "Newton converged to a constant state";
    } catch (const Error& e) {
      last = e.what();
    }
  }
  fail(ErrorCode::NoConvergence, "construct_wave: no nonconstant wave found (" + last + ")");
}

}  // namespace lle
