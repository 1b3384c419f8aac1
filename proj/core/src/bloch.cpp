#include "lle/bloch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>

#include "lle/cutoff.hpp"
#include "lle/dense_eigen.hpp"
#include "lle/error.hpp"
#include "lle/fft.hpp"
#include "lle/spectral.hpp"

namespace lle {
namespace {

std::size_t slot(long j, std::size_t n) {
  const long nn = static_cast<long>(n);
  return static_cast<std::size_t>(((j % nn) + nn) % nn);
}

// Separate spectra of the two real components from the packed complex spectrum.
std::pair<CVec, CVec> component_spectra(const RealPairField& f) {
  const CVec u = spectrum(f);
  const std::size_t n = u.size();
  CVec re(n), im(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cd mirror = std::conj(u[(n - j) % n]);
    re[j] = 0.5 * (u[j] + mirror);
    im[j] = cd(0.0, -0.5) * (u[j] - mirror);
  }
  return {re, im};
}

RealPairField from_component_spectra(const PeriodicGrid& grid, const CVec& re, const CVec& im) {
  const CVec a = fft_inverse(re);
  const CVec b = fft_inverse(im);
  RealPairField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cd(a[i].real(), b[i].real());
  return out;
}

Eigen::VectorXcd inverse_iteration(const Eigen::MatrixXcd& a, cd shift, Eigen::VectorXcd x,
                                   bool adjoint, int iterations) {
  const Eigen::Index n = a.rows();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a - shift * Eigen::MatrixXcd::Identity(n, n));
  for (int k = 0; k < iterations; ++k) {
    x = adjoint ? Eigen::VectorXcd(lu.adjoint().solve(x)) : Eigen::VectorXcd(lu.solve(x));
    x /= x.norm();
  }
  return x;
}

}  // namespace

long first_label(double xi, std::size_t n) {
  const long half = static_cast<long>(n / 2);
  return xi >= 0.0 ? -half : -half + 1;
}

LinearizationMatrix assemble_periodic_operator(const RealPairField& base, const WaveParameters& params,
                                               double xi) {
  const std::size_t n = base.size();
  const double period = base.grid().length();
  CVec a11(n), a12(n), a22(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = base[i].real(), s = base[i].imag();
    a11[i] = 3.0 * r * r + s * s;
    a12[i] = 2.0 * r * s;
    a22[i] = r * r + 3.0 * s * s;
  }
  const CVec p11 = fft_forward(a11), p12 = fft_forward(a12), p22 = fft_forward(a22);
  LinearizationMatrix out;
  out.xi = xi;
  out.period = period;
  out.first_label = first_label(xi, n);
  const auto nn = static_cast<Eigen::Index>(n);
  out.matrix.resize(2 * nn, 2 * nn);
  for (Eigen::Index a = 0; a < nn; ++a) {
    const long la = out.first_label + a;
    for (Eigen::Index b = 0; b < nn; ++b) {
      const std::size_t d = slot(la - (out.first_label + b), n);
      out.matrix(a, b) = -p12[d];
      out.matrix(a, nn + b) = -p22[d];
      out.matrix(nn + a, b) = p11[d];
      out.matrix(nn + a, nn + b) = p12[d];
    }
    const double k = xi + 2.0 * std::numbers::pi * static_cast<double>(la) / period;
    const double dispersion = params.beta * k * k - params.alpha;
    out.matrix(a, nn + a) -= dispersion;
    out.matrix(nn + a, a) += dispersion;
    out.matrix(a, a) -= 1.0;
    out.matrix(nn + a, nn + a) -= 1.0;
  }
  return out;
}

LinearizationMatrix assemble_bloch(const WaveProfile& wave, double xi) {
  const double t = wave.params.period;
  require(std::abs(xi) <= std::numbers::pi / t * (1.0 + 1e-12), "assemble_bloch: |xi| exceeds pi/T");
  return assemble_periodic_operator(wave.profile, wave.params, xi);
}

Eigen::VectorXcd to_fourier_vector(const RealPairField& f) {
  const std::size_t n = f.size();
  auto [re, im] = component_spectra(f);
  Eigen::VectorXcd v(2 * n);
  const long first = first_label(0.0, n);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t s = slot(first + static_cast<long>(a), n);
    v(a) = re[s];
    v(n + a) = im[s];
  }
  return v;
}

RealPairField from_fourier_vector(const PeriodicGrid& cell, const Eigen::VectorXcd& v) {
  const std::size_t n = cell.num_points();
  require(static_cast<std::size_t>(v.size()) == 2 * n, "from_fourier_vector: size mismatch");
  CVec re(n), im(n);
  const long first = first_label(0.0, n);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t s = slot(first + static_cast<long>(a), n);
    re[s] = v(a);
    im[s] = v(n + a);
  }
  return from_component_spectra(cell, re, im);
}

std::vector<Eigen::VectorXcd> bloch_decompose(const RealPairField& g) {
  const auto& grid = g.grid();
  const std::size_t big_n = grid.num_points();
  const std::size_t cells = grid.num_cells();
  const std::size_t n = grid.points_per_cell();
  auto [re, im] = component_spectra(g);
  std::vector<Eigen::VectorXcd> fibers(cells);
  const long half_m = static_cast<long>(cells / 2);
  for (long m = -half_m; m < static_cast<long>(cells) - half_m; ++m) {
    Eigen::VectorXcd v(2 * n);
    const long first = first_label(static_cast<double>(m), n);
    for (std::size_t a = 0; a < n; ++a) {
      const long j = m + static_cast<long>(cells) * (first + static_cast<long>(a));
      const std::size_t s = slot(j, big_n);
      v(a) = re[s];
      v(n + a) = im[s];
    }
    fibers[static_cast<std::size_t>(m + half_m)] = std::move(v);
  }
  return fibers;
}

RealPairField bloch_synthesize(const PeriodicGrid& full, const std::vector<Eigen::VectorXcd>& fibers) {
  const std::size_t big_n = full.num_points();
  const std::size_t cells = full.num_cells();
  const std::size_t n = full.points_per_cell();
  require(fibers.size() == cells, "bloch_synthesize: one fiber per cell index expected");
  CVec re(big_n), im(big_n);
  const long half_m = static_cast<long>(cells / 2);
  for (long m = -half_m; m < static_cast<long>(cells) - half_m; ++m) {
    const auto& v = fibers[static_cast<std::size_t>(m + half_m)];
    const long first = first_label(static_cast<double>(m), n);
    for (std::size_t a = 0; a < n; ++a) {
      const long j = m + static_cast<long>(cells) * (first + static_cast<long>(a));
      const std::size_t s = slot(j, big_n);
      re[s] = v(a);
      im[s] = v(n + a);
    }
  }
  return from_component_spectra(full, re, im);
}

Eigen::VectorXcd reflect_fiber(const Eigen::VectorXcd& v) {
  const Eigen::Index n = v.size() / 2;
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index a = 0; a < n; ++a) {
    out(a) = std::conj(v(n - 1 - a));
    out(n + a) = std::conj(v(2 * n - 1 - a));
  }
  return out;
}

double BlochSpectrumReport::max_real_part(std::size_t k, bool skip_kernel) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const cd& z : eigenvalues[k]) {
    if (skip_kernel && xi_grid[k] == 0.0 && std::abs(z) <= kernel_tol) continue;
    m = std::max(m, z.real());
  }
  return m;
}

BlochSpectrumReport verify_assumptions(const WaveProfile& wave, std::size_t xi_count,
                                       const BlochOptions& options) {
  require(xi_count >= 16 && xi_count % 2 == 0, "verify_assumptions: xi_count must be even and >= 16");
  const double period = wave.params.period;
  const std::size_t n = wave.profile.size();
  BlochSpectrumReport rep;
  rep.period = period;
  rep.points_per_period = n;
  rep.kernel_tol = options.kernel_tol;
  rep.spec_tol = options.spec_tol;
  for (std::size_t j = 0; j < xi_count; ++j)
    rep.xi_grid.push_back(-std::numbers::pi / period +
                          2.0 * std::numbers::pi * static_cast<double>(j) /
                              (period * static_cast<double>(xi_count)));
  const std::size_t zero = xi_count / 2;
  rep.xi_grid[zero] = 0.0;

  std::vector<std::size_t> direct;
  direct.push_back(0);
  for (std::size_t j = zero; j < xi_count; ++j) direct.push_back(j);
  std::vector<EigenDecomposition> solved(xi_count);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string error_message;
  auto worker = [&] {
    for (std::size_t k = next++; k < direct.size(); k = next++) {
      const std::size_t j = direct[k];
      try {
        const auto mat = assemble_bloch(wave, rep.xi_grid[j]);
        solved[j] = eigen_decompose(mat.matrix, j >= zero);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error_message = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (!error_message.empty()) fail(ErrorCode::EigenSolverFailure, error_message);

  rep.eigenvalues.resize(xi_count);
  for (std::size_t j = 0; j < xi_count; ++j) {
    std::vector<cd> vals;
    if (j == 0 || j >= zero) {
      vals.assign(solved[j].values.data(), solved[j].values.data() + solved[j].values.size());
    } else {
      const auto& mirror = solved[xi_count - j].values;
      for (Eigen::Index i = 0; i < mirror.size(); ++i) vals.push_back(std::conj(mirror(i)));
    }
    std::sort(vals.begin(), vals.end(), [](cd a, cd b) { return a.real() > b.real(); });
    rep.eigenvalues[j] = std::move(vals);
  }

  // Zero mode at xi = 0.
  const auto& zero_vals = solved[zero].values;
  Eigen::Index kernel_index = 0;
  for (Eigen::Index i = 0; i < zero_vals.size(); ++i)
    if (std::abs(zero_vals(i)) < std::abs(zero_vals(kernel_index))) kernel_index = i;
  rep.zero_eigenvalue = zero_vals(kernel_index);
  for (Eigen::Index i = 0; i < zero_vals.size(); ++i)
    if (std::abs(zero_vals(i)) <= options.kernel_tol) ++rep.near_zero_count;
  const bool has_kernel = rep.near_zero_count >= 1;
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < zero_vals.size(); ++i)
    if (!(has_kernel && i == kernel_index)) top = std::max(top, zero_vals(i).real());
  rep.gap_delta0 = -top;
  rep.fit_tol = options.fit_tol_factor * std::max(rep.gap_delta0, 0.0);

  // D1 with witness.
  rep.d1_ok = true;
  for (std::size_t j = 0; j < xi_count; ++j) {
    for (const cd& z : rep.eigenvalues[j]) {
      if (j == zero && has_kernel && std::abs(z - rep.zero_eigenvalue) == 0.0) continue;
      if (z.real() >= -options.spec_tol) {
        if (!rep.d1_witness || z.real() > rep.d1_witness->real()) {
          rep.d1_witness = z;
          rep.d1_witness_xi = rep.xi_grid[j];
        }
        rep.d1_ok = false;
      }
    }
  }
  if (rep.near_zero_count > 1) rep.d1_ok = false;

  // Kernel residual and adjoint overlap.
  const auto l0 = assemble_bloch(wave, 0.0);
  const Eigen::VectorXcd phi_prime = to_fourier_vector(wave.derivative);
  const double phi_prime_norm = phi_prime.norm();
  rep.kernel_residual = phi_prime_norm > 0.0 ? (l0.matrix * phi_prime).norm() / phi_prime_norm : 0.0;
  std::ostringstream notes;
  if (rep.near_zero_count == 1 && phi_prime_norm > 0.0) {
    const Eigen::VectorXcd right = solved[zero].vectors.col(kernel_index);
    const Eigen::VectorXcd left = inverse_iteration(l0.matrix, std::conj(rep.zero_eigenvalue) + 1e-10,
                                                    right, true, 4);
    rep.projector_overlap = std::abs(left.dot(right)) / (left.norm() * right.norm());
    // Simple-eigenvalue perturbation formula for d lambda / d xi at 0.
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd dl = Eigen::MatrixXcd::Zero(2 * nn, 2 * nn);
    for (Eigen::Index a = 0; a < nn; ++a) {
      const double k = 2.0 * std::numbers::pi * static_cast<double>(l0.first_label + a) / period;
      const double dd = 2.0 * wave.params.beta * k;
      dl(a, nn + a) = -dd;
      dl(nn + a, a) = dd;
    }
    rep.curve_slope_at_zero = left.dot(dl * right) / left.dot(right);
  }
  rep.d3_ok = rep.near_zero_count == 1 && rep.projector_overlap >= 1e-6 &&
              rep.kernel_residual <= 1e-8 && wave.is_nonconstant();

  // Critical curve by eigenvector continuity on xi >= 0.
  double xi_sep = 0.0;
  if (rep.d3_ok) {
    Eigen::VectorXcd prev = solved[zero].vectors.col(kernel_index);
    rep.tracked_curve.push_back({0.0, rep.zero_eigenvalue});
    for (std::size_t j = zero + 1; j < xi_count; ++j) {
      const auto& dec = solved[j];
      Eigen::Index best = 0;
      double best_overlap = -1.0;
      for (Eigen::Index i = 0; i < dec.values.size(); ++i) {
        const double ov = std::abs(prev.dot(dec.vectors.col(i)));
        if (ov > best_overlap) {
          best_overlap = ov;
          best = i;
        }
      }
      const cd lc = dec.values(best);
      double rest = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < dec.values.size(); ++i)
        if (i != best) rest = std::max(rest, dec.values(i).real());
      if (rest > lc.real() - 0.5 * rep.gap_delta0) {
        notes << "critical curve meets the rest of the spectrum near xi=" << rep.xi_grid[j] << "; ";
        break;
      }
      if (best_overlap < options.min_overlap) {
        std::ostringstream os;
        os << "ambiguous critical-curve tracking at xi=" << rep.xi_grid[j]
           << " (max eigenvector overlap " << best_overlap << ")";
        fail(ErrorCode::AmbiguousTracking, os.str());
      }
      rep.tracked_curve.push_back({rep.xi_grid[j], lc});
      xi_sep = rep.xi_grid[j];
      prev = dec.vectors.col(best);
    }
  }

  // theta: least squares along the separated critical curve and global lower envelope.
  double num = 0.0, den = 0.0;
  for (const auto& s : rep.tracked_curve) {
    if (s.xi == 0.0) continue;
    num += -s.lambda.real() * s.xi * s.xi;
    den += std::pow(s.xi, 4);
  }
  rep.theta_global = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < xi_count; ++j) {
    if (j == zero) continue;
    const double xi = rep.xi_grid[j];
    rep.theta_global = std::min(rep.theta_global, -rep.max_real_part(j, false) / (xi * xi));
  }
  rep.theta_least_squares = den > 0.0 ? num / den : rep.theta_global;
  rep.theta_fit = std::min(rep.theta_least_squares, rep.theta_global);

  rep.cutoff_xi0 = 0.0;
  for (const auto& s : rep.tracked_curve) {
    if (s.xi == 0.0) continue;
    if (s.xi > xi_sep || s.lambda.real() > -0.5 * rep.theta_fit * s.xi * s.xi) break;
    rep.cutoff_xi0 = s.xi;
  }
  for (auto it = rep.tracked_curve.rbegin(); it != rep.tracked_curve.rend(); ++it)
    if (it->xi > 0.0 && it->xi <= rep.cutoff_xi0) rep.critical_curve.push_back({-it->xi, std::conj(it->lambda)});
  for (const auto& s : rep.tracked_curve)
    if (s.xi <= rep.cutoff_xi0) rep.critical_curve.push_back(s);

  rep.d2_slack = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < xi_count; ++j) {
    const double xi = rep.xi_grid[j];
    rep.d2_slack = std::max(rep.d2_slack, rep.max_real_part(j, false) + rep.theta_fit * xi * xi);
  }
  rep.d2_ok = rep.theta_fit > 0.0 && rep.d2_slack <= rep.fit_tol;
  if (rep.d3_ok && rep.cutoff_xi0 <= 0.0) {
    notes << "no frequency band separates the critical curve; ";
    rep.d2_ok = false;
  }
  rep.notes = notes.str();
  return rep;
}

ZeroModeData compute_zero_mode(const WaveProfile& wave) {
  require(wave.is_nonconstant(), "compute_zero_mode: the wave is constant, no translation mode");
  const auto l0 = assemble_bloch(wave, 0.0);
  const Eigen::VectorXcd phi_prime = to_fourier_vector(wave.derivative);
  Eigen::VectorXcd left = inverse_iteration(l0.matrix, cd(1e-10, 0.0), phi_prime / phi_prime.norm(), true, 4);
  const double period = wave.params.period;
  left /= std::conj(period * left.dot(phi_prime));
  ZeroModeData zm;
  zm.phi_prime = wave.derivative;
  zm.adjoint_mode = from_fourier_vector(wave.grid(), left);
  zm.normalization_check = inner_product(zm.adjoint_mode, zm.phi_prime);
  zm.adjoint_residual = std::sqrt(period) * (l0.matrix.adjoint() * left).norm();
  return zm;
}

double projection_coefficient(const ZeroModeData& zm, const RealPairField& g) {
  return inner_product(zm.adjoint_mode, g);
}

RealPairField projection_pi0(const ZeroModeData& zm, const RealPairField& g) {
  return projection_coefficient(zm, g) * zm.phi_prime;
}

FiberPropagator::FiberPropagator(const Eigen::MatrixXcd& matrix) : matrix_(matrix) {
  auto dec = eigen_decompose(matrix, true);
  values_ = dec.values;
  vectors_ = std::move(dec.vectors);
  inverse_.compute(vectors_);
  use_expm_ = !(inverse_.rcond() > 1e-12);
}

Eigen::VectorXcd FiberPropagator::apply(const Eigen::VectorXcd& x, double t) const {
  if (use_expm_) return (matrix_ * t).exp() * x;
  Eigen::VectorXcd c = inverse_.solve(x);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(values_(i) * t);
  return vectors_ * c;
}

PeriodicSemigroup::PeriodicSemigroup(const WaveProfile& wave, const ZeroModeData& zm)
    : cell_(wave.grid()), zm_(zm), propagator_(assemble_bloch(wave, 0.0).matrix) {}

RealPairField PeriodicSemigroup::apply(const RealPairField& g, double t, bool subtract_projection) const {
  require(t >= 0.0, "semigroup: t must be nonnegative");
  require(g.grid() == cell_, "semigroup: g must live on the one-period grid");
  RealPairField out = from_fourier_vector(cell_, propagator_.apply(to_fourier_vector(g), t));
  if (subtract_projection) {
    const double chi = temporal_cutoff(t);
    if (chi != 0.0) out -= chi * projection_pi0(zm_, g);
  }
  return out;
}

RealPairField apply_semigroup_periodic(const WaveProfile& wave, const ZeroModeData& zm,
                                       const RealPairField& g, double t, bool subtract_projection) {
  return PeriodicSemigroup(wave, zm).apply(g, t, subtract_projection);
}

UnionCheck check_union_property(const WaveProfile& wave, std::size_t num_cells) {
  const PeriodicGrid full = wave.grid().with_cells(num_cells);
  const auto big = assemble_periodic_operator(tile(wave.profile, full), wave.params, 0.0);
  const Eigen::VectorXcd full_values = eigen_decompose(big.matrix, false).values;
  std::vector<cd> pool;
  const long half_m = static_cast<long>(num_cells / 2);
  for (long m = -half_m; m < static_cast<long>(num_cells) - half_m; ++m) {
    const double xi = 2.0 * std::numbers::pi * static_cast<double>(m) / full.length();
    const auto vals = eigen_decompose(assemble_bloch(wave, xi).matrix, false).values;
    pool.insert(pool.end(), vals.data(), vals.data() + vals.size());
  }
  require(pool.size() == static_cast<std::size_t>(full_values.size()), "union check: size mismatch");
  std::vector<bool> used(pool.size(), false);
  UnionCheck out;
  for (Eigen::Index i = 0; i < full_values.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(pool[k] - full_values(i));
      if (d < best) {
        best = d;
        best_k = k;
      }
    }
    used[best_k] = true;
    out.max_mismatch = std::max(out.max_mismatch, best);
    ++out.matched;
  }
  return out;
}

}  // namespace lle
