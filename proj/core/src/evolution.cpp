#include "lle/evolution.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lle/error.hpp"
#include "lle/fft.hpp"
#include "lle/operators.hpp"
#include "lle/spectral.hpp"

namespace lle {
namespace {

void check_finite(const CVec& c, double t) {
  for (const cd& z : c)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      std::ostringstream os;
      os << "non-finite field at t=" << t;
      fail(ErrorCode::BlowUp, os.str());
    }
}

// i |u|^2 u in place on physical values.
inline cd cubic(cd u) { return cd(0.0, std::norm(u)) * u; }

}  // namespace

ScalarField cell_indicator(const PeriodicGrid& full, const std::vector<std::size_t>& cells, double width) {
  ScalarField out(full);
  const double T = full.cell_period();
  const double L = full.length();
  const double s = width > 0.0 ? width * std::numbers::sqrt2 : 0.0;
  for (std::size_t c : cells) {
    if (c >= full.num_cells()) {
      std::ostringstream os;
      os << "knocked-out cell " << c << " outside 0.." << full.num_cells() - 1;
      fail(ErrorCode::InvalidArgument, os.str());
    }
    const double a = T * static_cast<double>(c);
    const double b = a + T;
    for (std::size_t i = 0; i < full.num_points(); ++i) {
      const double x = full.x(i);
      double acc = 0.0;
      for (int image = -1; image <= 1; ++image) {
        const double y = x + image * L;
        if (s == 0.0)
          acc += (y >= a && y < b) ? 1.0 : 0.0;
        else
          acc += 0.5 * (std::erf((y - a) / s) - std::erf((y - b) / s));
      }
      out[i] += acc;
    }
  }
  return out;
}

ToothData make_tooth_data(const WaveProfile& wave, const ToothPerturbation& spec, std::size_t num_cells) {
  const PeriodicGrid cell = wave.grid();
  const PeriodicGrid full = cell.with_cells(num_cells);
  ToothData out;
  out.w0 = spec.coperiodic_seed.size() == 0 ? RealPairField(cell) : spec.coperiodic_seed;
  require(out.w0.grid() == cell, "tooth data: co-periodic seed must live on the wave's grid");
  require(spec.smoothing_width >= 0.0, "tooth data: smoothing width must be nonnegative");
  std::vector<std::size_t> cells = spec.knocked_out_cells;
  const ScalarField chi = cell_indicator(full, cells, spec.smoothing_width);
  out.v0 = RealPairField(full);
  if (!cells.empty()) {
    const RealPairField base = tile(wave.profile + out.w0, full);
    out.v0 = multiply(chi, base);
    out.v0 *= -spec.depth;
  }
  if (spec.extra_localized) {
    require(spec.extra_localized->grid() == full, "tooth data: extra localized field grid mismatch");
    out.v0 += *spec.extra_localized;
  }
  return out;
}

RealPairField random_coperiodic(const PeriodicGrid& cell, double l2_size, long max_mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = cell.num_points();
  CVec re(n, 0.0), im(n, 0.0);
  // Independent real components, each with Hermitian spectrum.
  for (CVec* comp : {&re, &im}) {
    (*comp)[0] = normal(rng);
    for (long j = 1; j <= max_mode && j < static_cast<long>(n / 2); ++j) {
      const cd c(normal(rng), normal(rng));
      (*comp)[static_cast<std::size_t>(j)] = c / static_cast<double>(j * j);
      (*comp)[n - static_cast<std::size_t>(j)] = std::conj(c) / static_cast<double>(j * j);
    }
  }
  const CVec a = fft_inverse(re), b = fft_inverse(im);
  RealPairField out(cell);
  for (std::size_t i = 0; i < n; ++i) out[i] = cd(a[i].real(), b[i].real());
  const double scale = norm(out, NormKind::L2);
  if (scale > 0.0) out *= l2_size / scale;
  return out;
}

RealPairField localized_phase_bump(const WaveProfile& wave, const PeriodicGrid& full, double amplitude,
                                   double center, double width) {
  require(width > 0.0, "phase bump width must be positive");
  RealPairField out = tile(wave.derivative, full);
  const double L = full.length();
  for (std::size_t i = 0; i < full.num_points(); ++i) {
    double d = full.x(i) - center;
    d -= L * std::round(d / L);
    out[i] *= amplitude * std::exp(-d * d / (2.0 * width * width));
  }
  return out;
}

RealPairField SimulationState::u() const { return tile(w, v.grid()) + v; }

EtdCoefficients etd_coefficients(const PeriodicGrid& grid, const WaveParameters& params,
                                 const IntegratorOptions& options) {
  require(options.dt > 0.0, "integrator: dt must be positive");
  require(options.contour_points >= 8, "integrator: too few contour points");
  const std::size_t n = grid.num_points();
  const double h = options.dt;
  EtdCoefficients c;
  c.e.resize(n);
  c.e_half.resize(n);
  c.q.resize(n);
  c.f1.resize(n);
  c.f2.resize(n);
  c.f3.resize(n);
  const int mpts = options.contour_points;
  std::vector<cd> roots(static_cast<std::size_t>(mpts));
  for (int k = 0; k < mpts; ++k)
    roots[static_cast<std::size_t>(k)] = std::exp(cd(0.0, std::numbers::pi * (k + 0.5) * 2.0 / mpts));
  for (std::size_t i = 0; i < n; ++i) {
    const cd lh = linear_symbol(grid.wavenumber(i), params) * h;
    c.e[i] = std::exp(lh);
    c.e_half[i] = std::exp(0.5 * lh);
    cd q = 0.0, a = 0.0, b = 0.0, d = 0.0;
    for (const cd& r : roots) {
      const cd z = lh + r;
      const cd ez = std::exp(z);
      const cd z3 = z * z * z;
      q += (std::exp(0.5 * z) - 1.0) / z;
      a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
      b += (2.0 + z + ez * (z - 2.0)) / z3;
      d += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
    }
    const double inv = h / mpts;
    c.q[i] = q * inv;
    c.f1[i] = a * inv;
    c.f2[i] = b * inv;
    c.f3[i] = d * inv;
  }
  c.mask = options.dealias ? dealias_mask(n) : std::vector<double>(n, 1.0);
  return c;
}

namespace {

// One Cox-Matthews step for two spectral fields sharing stages; nl maps (a, b) to (Na, Nb).
template <class Nonlinear>
void etdrk4_pair(const EtdCoefficients& ca, const EtdCoefficients& cb, CVec& a, CVec& b, Nonlinear&& nl) {
  const std::size_t na = a.size(), nb = b.size();
  CVec n0a(na), n0b(nb), n1a(na), n1b(nb), n2a(na), n2b(nb), n3a(na), n3b(nb);
  CVec sa(na), sb(nb), s2a(na), s2b(nb);
  nl(a, b, n0a, n0b);
  for (std::size_t i = 0; i < na; ++i) sa[i] = ca.e_half[i] * a[i] + ca.q[i] * n0a[i];
  for (std::size_t i = 0; i < nb; ++i) sb[i] = cb.e_half[i] * b[i] + cb.q[i] * n0b[i];
  nl(sa, sb, n1a, n1b);
  for (std::size_t i = 0; i < na; ++i) s2a[i] = ca.e_half[i] * a[i] + ca.q[i] * n1a[i];
  for (std::size_t i = 0; i < nb; ++i) s2b[i] = cb.e_half[i] * b[i] + cb.q[i] * n1b[i];
  nl(s2a, s2b, n2a, n2b);
  for (std::size_t i = 0; i < na; ++i) sa[i] = ca.e_half[i] * sa[i] + ca.q[i] * (2.0 * n2a[i] - n0a[i]);
  for (std::size_t i = 0; i < nb; ++i) sb[i] = cb.e_half[i] * sb[i] + cb.q[i] * (2.0 * n2b[i] - n0b[i]);
  nl(sa, sb, n3a, n3b);
  for (std::size_t i = 0; i < na; ++i)
    a[i] = ca.e[i] * a[i] + ca.f1[i] * n0a[i] + 2.0 * ca.f2[i] * (n1a[i] + n2a[i]) + ca.f3[i] * n3a[i];
  for (std::size_t i = 0; i < nb; ++i)
    b[i] = cb.e[i] * b[i] + cb.f1[i] * n0b[i] + 2.0 * cb.f2[i] * (n1b[i] + n2b[i]) + cb.f3[i] * n3b[i];
}

}  // namespace

CoupledIntegrator::CoupledIntegrator(const WaveParameters& params, const SimulationState& initial,
                                     const IntegratorOptions& options)
    : params_(params),
      cell_(initial.w.grid()),
      full_(initial.v.grid()),
      options_(options),
      time_(initial.time),
      steps_(initial.steps) {
  require(full_.points_per_cell() == cell_.num_points() && cell_.num_cells() == 1 &&
              full_.cell_period() == cell_.cell_period(),
          "coupled integrator: w must live on one period of the v grid");
  cw_ = etd_coefficients(cell_, params_, options_);
  cv_ = etd_coefficients(full_, params_, options_);
  w_hat_ = spectrum(initial.w);
  v_hat_ = spectrum(initial.v);
  wp_.resize(cell_.num_points());
  vp_.resize(full_.num_points());
  tmp_.resize(full_.num_points());
}

void CoupledIntegrator::nonlinear(const CVec& w_hat, const CVec& v_hat, CVec& nw, CVec& nv) {
  const std::size_t n = cell_.num_points(), nf = full_.num_points();
  fft_inverse(w_hat.data(), wp_.data(), n);
  fft_inverse(v_hat.data(), vp_.data(), nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const cd w = wp_[i % n];
    tmp_[i] = cubic(vp_[i] + w) - cubic(w);
  }
  fft_forward(tmp_.data(), nv.data(), nf);
  for (std::size_t i = 0; i < nf; ++i) nv[i] *= cv_.mask[i];
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = cubic(wp_[i]);
  fft_forward(tmp_.data(), nw.data(), n);
  for (std::size_t i = 0; i < n; ++i) nw[i] *= cw_.mask[i];
  nw[0] += params_.forcing;
}

void CoupledIntegrator::step() {
  etdrk4_pair(cw_, cv_, w_hat_, v_hat_,
              [this](const CVec& a, const CVec& b, CVec& na, CVec& nb) { nonlinear(a, b, na, nb); });
  ++steps_;
  time_ += options_.dt;
  check_finite(w_hat_, time_);
  check_finite(v_hat_, time_);
}

void CoupledIntegrator::advance_to(double t) {
  while (time_ + 0.5 * options_.dt < t) step();
}

RealPairField CoupledIntegrator::w() const { return from_spectrum(cell_, w_hat_); }
RealPairField CoupledIntegrator::v() const { return from_spectrum(full_, v_hat_); }

SimulationState CoupledIntegrator::state() const {
  SimulationState s;
  s.time = time_;
  s.w = w();
  s.v = v();
  s.dt = options_.dt;
  s.steps = steps_;
  return s;
}

FullFieldIntegrator::FullFieldIntegrator(const WaveParameters& params, const RealPairField& u0, double t0,
                                         const IntegratorOptions& options)
    : params_(params), grid_(u0.grid()), options_(options), time_(t0) {
  c_ = etd_coefficients(grid_, params_, options_);
  u_hat_ = spectrum(u0);
  up_.resize(grid_.num_points());
}

void FullFieldIntegrator::nonlinear(const CVec& u_hat, CVec& out) {
  const std::size_t n = grid_.num_points();
  fft_inverse(u_hat.data(), up_.data(), n);
  for (auto& z : up_) z = cubic(z);
  fft_forward(up_.data(), out.data(), n);
  for (std::size_t i = 0; i < n; ++i) out[i] *= c_.mask[i];
  out[0] += params_.forcing;
}

void FullFieldIntegrator::step() {
  CVec dummy;
  etdrk4_pair(c_, EtdCoefficients{}, u_hat_, dummy, [this](const CVec& a, const CVec&, CVec& na, CVec&) {
    nonlinear(a, na);
  });
  time_ += options_.dt;
  check_finite(u_hat_, time_);
}

void FullFieldIntegrator::advance_to(double t) {
  while (time_ + 0.5 * options_.dt < t) step();
}

RealPairField FullFieldIntegrator::u() const { return from_spectrum(grid_, u_hat_); }

SimulationState initial_state(const WaveProfile& wave, const ToothData& data, double dt) {
  SimulationState s;
  s.time = 0.0;
  s.w = wave.profile + data.w0;
  s.v = data.v0;
  s.dt = dt;
  return s;
}

SimulationState step(const SimulationState& state, const WaveProfile& wave, const IntegratorOptions& options) {
  IntegratorOptions opt = options;
  if (state.dt > 0.0) opt.dt = state.dt;
  CoupledIntegrator integ(wave.params, state, opt);
  integ.step();
  SimulationState out = integ.state();
  out.boundary_warning = state.boundary_warning;
  return out;
}

double boundary_level(const RealPairField& v, double fraction) {
  const auto& g = v.grid();
  const std::size_t m = g.num_cells();
  const std::size_t outer = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m))));
  if (2 * outer >= m) return 0.0;
  const std::size_t per = g.points_per_cell();
  double level = 0.0;
  for (std::size_t i = 0; i < g.num_points(); ++i) {
    const std::size_t c = i / per;
    if (c < outer || c >= m - outer) level = std::max(level, std::abs(v[i]));
  }
  return level;
}

Trajectory evolve(const WaveProfile& wave, const ToothData& data, const EvolveOptions& options) {
  require(options.t_end > 0.0, "evolve: t_end must be positive");
  require(options.snapshot_stride >= 1, "evolve: snapshot stride must be positive");
  Trajectory traj;
  traj.params = wave.params;
  SimulationState s0 = initial_state(wave, data, options.integrator.dt);
  const double v_scale = norm(data.v0, NormKind::Linf);
  auto contaminated = [&](const RealPairField& v) {
    const double level = boundary_level(v, options.boundary_fraction);
    return v_scale > 0.0 ? level > options.boundary_tol * v_scale : level > options.boundary_tol;
  };
  CoupledIntegrator integ(wave.params, s0, options.integrator);
  traj.snapshots.push_back(s0);
  if (options.observer && options.sample_stride > 0) options.observer(s0);
  const auto total = static_cast<std::size_t>(std::llround(options.t_end / options.integrator.dt));
  bool flagged = false;
  for (std::size_t k = 1; k <= total; ++k) {
    integ.step();
    const bool snap = k % options.snapshot_stride == 0 || k == total;
    const bool sample = options.observer && options.sample_stride > 0 && k % options.sample_stride == 0;
    if (!snap && !sample) continue;
    SimulationState s = integ.state();
    if (!flagged && contaminated(s.v)) {
      flagged = true;
      traj.contamination_time = s.time;
      std::ostringstream os;
      os << "boundary contamination from t=" << s.time;
      traj.warnings.push_back(os.str());
    }
    s.boundary_warning = flagged;
    if (sample) options.observer(s);
    if (snap) traj.snapshots.push_back(std::move(s));
  }
  return traj;
}

}  // namespace lle
