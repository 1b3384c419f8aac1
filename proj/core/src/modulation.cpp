#include "lle/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "lle/cutoff.hpp"
#include "lle/diagnostics.hpp"
#include "lle/error.hpp"
#include "lle/nonlinear_terms.hpp"
#include "lle/spectral.hpp"

namespace lle {
namespace {

constexpr double kGregory[4] = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};

ScalarField negate(const ScalarField& f) { return -1.0 * f; }

// Least squares slope of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y, double* r2) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  if (r2) *r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, my - slope * mx};
}

void check_uniform_time(double t, std::size_t k, double dt) {
  const double expected = static_cast<double>(k) * dt;
  if (std::abs(t - expected) > 1e-9 * std::max(1.0, expected)) {
    std::ostringstream os;
    os << "modulation samples must lie on t = k * " << dt << "; got t=" << t << " for k=" << k;
    fail(ErrorCode::InvalidArgument, os.str());
  }
}

}  // namespace

SigmaMethod parse_sigma_method(const std::string& name) {
  if (name == "projection") return SigmaMethod::Projection;
  if (name == "fit") return SigmaMethod::Fit;
  fail(ErrorCode::InvalidArgument, "unknown sigma method '" + name + "' (projection|fit)");
}

GammaMethod parse_gamma_method(const std::string& name) {
  if (name == "duhamel") return GammaMethod::Duhamel;
  if (name == "fit") return GammaMethod::Fit;
  fail(ErrorCode::InvalidArgument, "unknown gamma method '" + name + "' (duhamel|fit)");
}

std::string to_string(SigmaMethod m) { return m == SigmaMethod::Projection ? "projection" : "fit"; }
std::string to_string(GammaMethod m) { return m == GammaMethod::Duhamel ? "duhamel" : "fit"; }

double left_corrected_weight(std::size_t j, std::size_t k) {
  if (k == 0) return 0.0;
  if (k < 8) return (j == 0 || j == k) ? 0.5 : 1.0;
  if (j < 4) return kGregory[j];
  return j == k ? 0.5 : 1.0;
}

SigmaMarcher::SigmaMarcher(const WaveProfile& wave, const ZeroModeData& zm, const RealPairField& w_initial,
                           double dt)
    : wave_(wave), zm_(zm), dt_(dt) {
  require(dt > 0.0, "sigma marcher: dt must be positive");
  c0_ = projection_coefficient(zm_, w_initial - wave_.profile);
}

std::pair<double, double> SigmaMarcher::push(const RealPairField& w) {
  const std::size_t k = sigma_.size();
  const double t = static_cast<double>(k) * dt_;
  double s = temporal_cutoff(t) * c0_;
  double sd = temporal_cutoff_derivative(t) * c0_;
  for (std::size_t j = 0; j < k; ++j) {
    const double tau = t - static_cast<double>(j) * dt_;
    if (tau <= 1.0) break;
    const double q = left_corrected_weight(j, k) * dt_;
    s += q * temporal_cutoff(tau) * f_[j];
    sd += q * temporal_cutoff_derivative(tau) * f_[j];
  }
  const RealPairField shifted = translate(wave_.profile, s);
  const RealPairField ring_w = w - shifted;
  RealPairField src = r4(wave_.profile, shifted, ring_w);
  src += sd * (translate(wave_.derivative, s) - wave_.derivative);
  f_.push_back(projection_coefficient(zm_, src));
  sigma_.push_back(s);
  sigma_dot_.push_back(sd);
  return {s, sd};
}

double fit_phase(const RealPairField& w, const RealPairField& phi, double start) {
  require(w.grid() == phi.grid(), "fit_phase: grid mismatch");
  const auto& g = w.grid();
  const CVec cw = spectrum(w), cp = spectrum(phi);
  const std::size_t n = g.num_points();
  // h(s) = Re sum conj(phi_k) w_k e^{-i k s} is the real pairing of phi with w(. - s).
  auto eval = [&](double s, double& d1, double& d2) {
    double h = 0.0;
    d1 = d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double k = g.wavenumber(i);
      const cd a = std::conj(cp[i]) * cw[i] * std::exp(cd(0.0, -k * s));
      h += a.real();
      d1 += (a * cd(0.0, -k)).real();
      d2 -= k * k * a.real();
    }
    return h;
  };
  double s = start;
  for (int it = 0; it < 60; ++it) {
    double d1, d2;
    eval(s, d1, d2);
    double step = d2 < 0.0 ? -d1 / d2 : 0.1 * g.length() / static_cast<double>(n) * (d1 > 0 ? 1 : -1);
    const double cap = 0.25 * g.cell_period();
    step = std::clamp(step, -cap, cap);
    s += step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(s))) break;
  }
  if (std::abs(s - start) > 0.5 * g.cell_period()) {
    std::ostringstream os;
    os << "phase fit jumped by " << s - start << ", more than half a period";
    fail(ErrorCode::TrackingJump, os.str());
  }
  return s;
}

SigmaTrack extract_sigma(const std::vector<double>& times, const std::vector<RealPairField>& w_track,
                         const WaveProfile& wave, const ZeroModeData& zm, SigmaMethod method) {
  require(times.size() == w_track.size() && times.size() >= 2, "extract_sigma: need matching samples");
  const double dt = times[1] - times[0];
  SigmaTrack tr;
  tr.method = method;
  tr.times = times;
  if (method == SigmaMethod::Projection) {
    SigmaMarcher marcher(wave, zm, w_track.front(), dt);
    for (std::size_t k = 0; k < times.size(); ++k) {
      check_uniform_time(times[k] - times[0], k, dt);
      const auto [s, sd] = marcher.push(w_track[k]);
      tr.sigma.push_back(s);
      tr.sigma_dot.push_back(sd);
    }
  } else {
    double prev = 0.0;
    for (const auto& w : w_track) {
      prev = fit_phase(w, wave.profile, prev);
      tr.sigma.push_back(prev);
    }
    const std::size_t n = tr.sigma.size();
    tr.sigma_dot.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == 0)
        tr.sigma_dot[k] = (tr.sigma[1] - tr.sigma[0]) / dt;
      else if (k + 1 == n)
        tr.sigma_dot[k] = (tr.sigma[k] - tr.sigma[k - 1]) / dt;
      else
        tr.sigma_dot[k] = (tr.sigma[k + 1] - tr.sigma[k - 1]) / (2.0 * dt);
    }
  }
  finish_sigma_star(tr);
  return tr;
}

void finish_sigma_star(SigmaTrack& tr) {
  const std::size_t n = tr.sigma.size();
  if (n == 0) return;
  tr.sigma_star = tr.sigma.back();
  tr.sigma_star_rate = 0.0;
  tr.sigma_star_residual = 1.0;
  std::vector<double> x, y;
  for (std::size_t k = n / 2; k < n; ++k) {
    const double a = std::abs(tr.sigma_dot[k]);
    if (a > 1e-13 && tr.times[k] > 2.0) {
      x.push_back(tr.times[k]);
      y.push_back(std::log(a));
    }
  }
  if (x.size() < 5) return;
  double r2 = 0.0;
  const auto [slope, icpt] = linear_fit(x, y, &r2);
  (void)icpt;
  tr.sigma_star_residual = 1.0 - r2;
  if (slope < 0.0) {
    tr.sigma_star_rate = -slope;
    tr.sigma_star += tr.sigma_dot.back() / tr.sigma_star_rate;
  }
}

InversePerturbations inverse_modulated(const SimulationState& s, double sigma, const ScalarField& gamma,
                                       const WaveProfile& wave) {
  const PeriodicGrid& full = s.v.grid();
  InversePerturbations out;
  const RealPairField w_shift = translate(s.w, -sigma);
  out.hat_w = w_shift - wave.profile;
  const ScalarField shift = gamma.size() ? negate(gamma) : ScalarField(full);
  out.hat_v = compose(s.u(), full, shift, -sigma) - tile(w_shift, full);
  return out;
}

ForwardPerturbations forward_modulated(const SimulationState& s, double sigma, const ScalarField& gamma,
                                       const WaveProfile& wave) {
  const PeriodicGrid& full = s.v.grid();
  ForwardPerturbations out;
  out.ring_w = s.w - translate(wave.profile, sigma);
  out.ring_v = s.v + tile(s.w, full);
  if (gamma.size())
    out.ring_v -= compose(s.w, full, gamma);
  else
    out.ring_v -= tile(s.w, full);
  return out;
}

ScalarField fit_gamma(const SimulationState& s, double sigma, const WaveProfile& wave,
                      const ScalarField* previous) {
  (void)wave;
  const PeriodicGrid& full = s.v.grid();
  const std::size_t m = full.num_cells(), per = full.points_per_cell(), n = full.num_points();
  const double T = full.cell_period();
  const RealPairField u = s.u();
  const PointEvaluator eu(u), eux(spectral_derivative(u, 1));
  const PointEvaluator ew(s.w);
  PeriodicGrid coarse(m, T, m);
  ScalarField cells(coarse);
  std::vector<double> prev_cells(m, 0.0);
  if (previous) {
    std::vector<double> centers(m);
    for (std::size_t c = 0; c < m; ++c) centers[c] = (static_cast<double>(c) + 0.5) * T;
    prev_cells = interpolate(*previous, centers);
  }
  for (std::size_t c = 0; c < m; ++c) {
    const double xc = (static_cast<double>(c) + 0.5) * T;
    double g = prev_cells[c];
    for (int it = 0; it < 8; ++it) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < 2 * per; ++i) {
        const double x = xc - T + full.spacing() * static_cast<double>(i);
        const double wgt = std::exp(-0.5 * std::pow((x - xc) / (0.5 * T), 2));
        const cd r = eu(x - sigma - g) - ew(x - sigma);
        const cd d = eux(x - sigma - g);
        num += wgt * (std::conj(d) * r).real();
        den += wgt * std::norm(d);
      }
      if (den <= 0.0) break;
      const double step = num / den;
      g += std::clamp(step, -0.1 * T, 0.1 * T);
      if (std::abs(step) < 1e-13) break;
    }
    cells[c] = g;
  }
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = full.x(i) - 0.5 * T;
  return ScalarField(full, interpolate(cells, pts));
}

// ---------------------------------------------------------------------------------------------
// Streaming tracker

struct ModulationTracker::Impl {
  WaveProfile wave;
  ZeroModeData zm;
  std::shared_ptr<const CriticalModeSplit> split;
  ToothData data;
  ModulationOptions options;
  PeriodicGrid full;
  RealPairField phi_full, phi_prime_full;
  std::unique_ptr<SigmaMarcher> marcher;
  double fit_sigma_prev = 0.0;
  std::vector<cd> p0;                              // mode coefficients of v0
  std::vector<std::vector<cd>> kern, kern_dot;     // kernel tables at tau = j * dt
  std::vector<std::vector<cd>> sources;            // projected source at every sample
  std::vector<std::vector<cd>> g_modes, gd_modes;  // gamma and gamma_t modes at every sample
  ScalarField gamma_prev;
  bool valid = true;
  bool halted = false;
  std::size_t count = 0;

  const std::vector<cd>& kernel_at(std::size_t j, bool deriv) {
    while (kern.size() <= j) {
      const double tau = static_cast<double>(kern.size()) * options.sample_dt;
      kern.push_back(split->kernel(tau, false));
      kern_dot.push_back(split->kernel(tau, true));
    }
    return deriv ? kern_dot[j] : kern[j];
  }

  // gamma modes at sample k from the sources stored for samples j < k.
  void gamma_modes_at(std::size_t k, const std::vector<std::vector<cd>>& src, std::vector<cd>& g,
                      std::vector<cd>& gd) {
    const std::size_t nm = split->modes().size();
    g.assign(nm, 0.0);
    gd.assign(nm, 0.0);
    const auto& k0 = kernel_at(k, false);
    const auto& k0d = kernel_at(k, true);
    for (std::size_t m = 0; m < nm; ++m) {
      g[m] = k0[m] * p0[m];
      gd[m] = k0d[m] * p0[m];
    }
    const double dt = options.sample_dt;
    for (std::size_t j = 0; j < k && j < src.size(); ++j) {
      if (static_cast<double>(k - j) * dt <= 1.0) break;
      const double q = left_corrected_weight(j, k) * dt;
      const auto& kk = kernel_at(k - j, false);
      const auto& kd = kernel_at(k - j, true);
      for (std::size_t m = 0; m < nm; ++m) {
        g[m] += q * kk[m] * src[j][m];
        gd[m] += q * kd[m] * src[j][m];
      }
    }
  }

  std::vector<cd> source(const SimulationState& s, double, double sigma_dot, const InversePerturbations& inv,
                         const PhaseFields& ph) {
    const RealPairField hat_w = tile(inv.hat_w, full);
    RealPairField n = r3(phi_full, phi_prime_full, hat_w, inv.hat_v, ph, wave.params.beta);
    n -= sigma_dot * spectral_derivative(inv.hat_v, 1);
    ScalarField one_minus(full);
    for (std::size_t i = 0; i < full.num_points(); ++i) one_minus[i] = 1.0 - ph.gamma_x[i];
    n += multiply(one_minus, r22(phi_full, hat_w, inv.hat_v));
    n += t_term(phi_full, hat_w, ph, wave.params.beta);
    (void)s;
    return split->project(n);
  }
};

ModulationTracker::ModulationTracker(const WaveProfile& wave, const ZeroModeData& zm,
                                     std::shared_ptr<const CriticalModeSplit> split, const ToothData& data,
                                     const ModulationOptions& options)
    : impl_(std::make_unique<Impl>()) {
  auto& im = *impl_;
  require(options.sample_dt > 0.0, "modulation: sample spacing must be positive");
  im.wave = wave;
  im.zm = zm;
  im.split = std::move(split);
  im.data = data;
  im.options = options;
  im.full = data.v0.grid();
  im.phi_full = tile(wave.profile, im.full);
  im.phi_prime_full = tile(wave.derivative, im.full);
  if (options.sigma_method == SigmaMethod::Projection)
    im.marcher = std::make_unique<SigmaMarcher>(wave, zm, wave.profile + data.w0, options.sample_dt);
  if (options.gamma_method == GammaMethod::Duhamel) {
    if (im.split) {
      require(im.split->grid() == im.full, "modulation: critical split grid differs from the v grid");
      im.p0 = im.split->project(data.v0);
    } else if (norm(data.v0, NormKind::Linf) > 0.0) {
      track_.events.push_back("no critical-mode split available; gamma held at zero");
    }
  }
  track_.gamma_method = options.gamma_method;
  track_.sigma.method = options.sigma_method;
  track_.e_p = std::sqrt(sobolev_norm_squared(data.w0, 6));
  track_.e_l = norm(data.v0, NormKind::H3);
}

ModulationTracker::~ModulationTracker() = default;

void ModulationTracker::push(const SimulationState& s) {
  auto& im = *impl_;
  if (im.halted) return;
  const std::size_t k = im.count;
  check_uniform_time(s.time, k, im.options.sample_dt);
  const int beta = im.wave.params.beta;

  double sigma, sigma_dot;
  if (im.marcher) {
    std::tie(sigma, sigma_dot) = im.marcher->push(s.w);
  } else {
    sigma = fit_phase(s.w, im.wave.profile, im.fit_sigma_prev);
    sigma_dot = k == 0 ? 0.0 : (sigma - im.fit_sigma_prev) / im.options.sample_dt;
    im.fit_sigma_prev = sigma;
  }

  ScalarField gamma(im.full), gamma_t(im.full);
  std::vector<cd> gm, gdm;
  const bool duhamel = im.options.gamma_method == GammaMethod::Duhamel && im.split;
  if (duhamel) {
    im.gamma_modes_at(k, im.sources, gm, gdm);
    gamma = im.split->synthesize(gm);
    gamma_t = im.split->synthesize(gdm);
  } else if (im.options.gamma_method == GammaMethod::Fit) {
    gamma = fit_gamma(s, sigma, im.wave, k ? &im.gamma_prev : nullptr);
    if (k > 0) {
      gamma_t = gamma;
      gamma_t -= im.gamma_prev;
      gamma_t *= 1.0 / im.options.sample_dt;
    }
    im.gamma_prev = gamma;
  }
  const PhaseFields ph = PhaseFields::from_gamma(gamma, gamma_t);
  const double gx_sup = ph.gamma_x.max_abs();
  if (gx_sup > im.options.gamma_x_limit && im.valid) {
    im.valid = false;
    track_.validity_end = s.time;
    std::ostringstream os;
    os << "||gamma_x||_inf = " << gx_sup << " exceeds " << im.options.gamma_x_limit << " at t=" << s.time;
    track_.events.push_back(os.str());
  }
  double gx_max = 0.0;
  for (double v : ph.gamma_x.values()) gx_max = std::max(gx_max, v);
  if (gx_max >= 0.95) {
    im.halted = true;
    std::ostringstream os;
    os << "tracking halted at t=" << s.time << ": gamma_x approaches 1";
    track_.events.push_back(os.str());
    return;
  }

  const InversePerturbations inv = inverse_modulated(s, sigma, gamma, im.wave);
  const ForwardPerturbations fwd = forward_modulated(s, sigma, gamma, im.wave);
  if (duhamel) {
    im.sources.push_back(im.source(s, sigma, sigma_dot, inv, ph));
    im.g_modes.push_back(gm);
    im.gd_modes.push_back(gdm);
  }

  SampleNorms sn;
  sn.t = s.time;
  sn.boundary_warning = s.boundary_warning;
  sn.gamma_valid = im.valid;
  sn.sigma = sigma;
  sn.sigma_dot = sigma_dot;
  sn.hat_w_l2 = norm(inv.hat_w, NormKind::L2);
  sn.hat_w_h1 = norm(inv.hat_w, NormKind::H1);
  sn.ring_w_h1 = norm(fwd.ring_w, NormKind::H1);
  sn.tilde_w_linf = norm(s.w - im.wave.profile, NormKind::Linf);
  sn.hat_v_l2 = norm(inv.hat_v, NormKind::L2);
  sn.hat_v_linf = norm(inv.hat_v, NormKind::Linf);
  sn.hat_v_h3 = norm(inv.hat_v, NormKind::H3);
  sn.ring_v_l2 = norm(fwd.ring_v, NormKind::L2);
  sn.ring_v_linf = norm(fwd.ring_v, NormKind::Linf);
  sn.ring_v_h3 = norm(fwd.ring_v, NormKind::H3);
  for (int j = 0; j <= 3; ++j) {
    const double a = norm(j ? spectral_derivative(fwd.ring_v, j) : fwd.ring_v, NormKind::L2);
    sn.ring_v_deriv_sq[j] = a * a;
  }
  if (im.options.energies) {
    const RealPairField ring_phi = compose(im.wave.profile, im.full, gamma);
    for (int j = 1; j <= 3; ++j) sn.energy[j] = damping_energy(fwd.ring_v, ring_phi, beta, j);
  }
  sn.gamma_l2 = norm(gamma, NormKind::L2);
  sn.gamma_linf = gamma.max_abs();
  sn.gamma_x_l2 = norm(ph.gamma_x, NormKind::L2);
  sn.gamma_x_linf = gx_sup;
  sn.gamma_x_h3 = norm(ph.gamma_x, NormKind::H3);
  sn.gamma_x_h4 = norm(ph.gamma_x, NormKind::H4);
  for (int j = 1; j <= 3; ++j) {
    sn.gamma_x_hsq[j] = sobolev_norm_squared(ph.gamma_x, j + 1);
    sn.gamma_t_hsq[j] = sobolev_norm_squared(gamma_t, j);
  }
  sn.gamma_t_h3 = norm(gamma_t, NormKind::H3);
  sn.v_l2 = norm(s.v, NormKind::L2);
  sn.v_linf = norm(s.v, NormKind::Linf);
  sn.u_minus_phi_linf = norm(s.u() - im.phi_full, NormKind::Linf);
  track_.samples.push_back(sn);
  track_.sigma.times.push_back(s.time);
  track_.sigma.sigma.push_back(sigma);
  track_.sigma.sigma_dot.push_back(sigma_dot);
  if (im.options.keep_every > 0 && k % im.options.keep_every == 0) {
    track_.gamma_fields.emplace_back(s.time, gamma);
    track_.gamma_t_fields.emplace_back(s.time, gamma_t);
  }
  ++im.count;
}

ModulationTrack ModulationTracker::finish() {
  auto& im = *impl_;
  if (!im.marcher && track_.sigma.sigma.size() > 2) {
    // Central differences replace the causal ones for the fit method.
    auto& sg = track_.sigma;
    const double dt = im.options.sample_dt;
    const std::size_t n = sg.sigma.size();
    sg.sigma_dot[0] = (sg.sigma[1] - sg.sigma[0]) / dt;
    for (std::size_t k = 1; k + 1 < n; ++k) sg.sigma_dot[k] = (sg.sigma[k + 1] - sg.sigma[k - 1]) / (2 * dt);
    sg.sigma_dot[n - 1] = (sg.sigma[n - 1] - sg.sigma[n - 2]) / dt;
    for (std::size_t k = 0; k < n; ++k) track_.samples[k].sigma_dot = sg.sigma_dot[k];
  }
  finish_sigma_star(track_.sigma);
  return track_;
}

ModulationTrack extract_modulation(const std::vector<SimulationState>& states, const WaveProfile& wave,
                                   const ZeroModeData& zm, std::shared_ptr<const CriticalModeSplit> split,
                                   const ToothData& data, const ModulationOptions& options) {
  require(!states.empty(), "extract_modulation: empty trajectory");
  ModulationTracker tracker(wave, zm, split, data, options);
  for (const auto& s : states) tracker.push(s);
  ModulationTrack track = tracker.finish();
  auto& im = *tracker.impl_;
  if (options.gamma_method != GammaMethod::Duhamel || !im.split || im.sources.empty()) return track;

  // Picard sweeps of the whole-window map gamma -> s_p v0 + int s_p(t - s) N(gamma)(s) ds.
  const std::size_t n = im.sources.size();
  const auto& modes = im.split->modes();
  const double length = im.full.length();
  auto h2_distance = [&](const std::vector<cd>& a, const std::vector<cd>& b) {
    double acc = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double xi2 = modes[m].xi * modes[m].xi;
      acc += std::norm(a[m] - b[m]) * (1.0 + xi2 + xi2 * xi2);
    }
    return std::sqrt(length * acc);
  };
  std::vector<std::vector<cd>> g = im.g_modes, gd = im.gd_modes;
  double prev_diff = -1.0;
  int high_ratio = 0;
  track.sweeps = 1;
  for (int sweep = 2; sweep <= options.max_sweeps; ++sweep) {
    std::vector<std::vector<cd>> src(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = states[k];
      const ScalarField gamma = im.split->synthesize(g[k]);
      const ScalarField gamma_t = im.split->synthesize(gd[k]);
      const PhaseFields ph = PhaseFields::from_gamma(gamma, gamma_t);
      const auto inv = inverse_modulated(s, track.sigma.sigma[k], gamma, wave);
      src[k] = im.source(s, track.sigma.sigma[k], track.sigma.sigma_dot[k], inv, ph);
    }
    double diff = 0.0;
    std::vector<std::vector<cd>> g_new(n), gd_new(n);
    for (std::size_t k = 0; k < n; ++k) {
      im.gamma_modes_at(k, src, g_new[k], gd_new[k]);
      diff = std::max(diff, h2_distance(g_new[k], g[k]));
    }
    track.sweeps = sweep;
    track.sweep_difference = diff;
    if (prev_diff > 0.0) {
      const double ratio = diff / prev_diff;
      track.sweep_ratios.push_back(ratio);
      high_ratio = ratio >= 0.9 ? high_ratio + 1 : 0;
      if (high_ratio >= 3)
        fail(ErrorCode::NoConvergence, "phase Picard iteration is not contracting (ratio >= 0.9 for 3 sweeps)");
      if (ratio > 0.7) {
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t m = 0; m < modes.size(); ++m) {
            g_new[k][m] = 0.5 * (g_new[k][m] + g[k][m]);
            gd_new[k][m] = 0.5 * (gd_new[k][m] + gd[k][m]);
          }
        std::ostringstream os;
        os << "under-relaxation 0.5 in sweep " << sweep << " (ratio " << ratio << ")";
        track.events.push_back(os.str());
      }
    }
    g = std::move(g_new);
    gd = std::move(gd_new);
    prev_diff = diff;
    if (diff <= options.picard_tol) break;
  }
  if (track.sweep_difference > options.picard_tol)
    fail(ErrorCode::NoConvergence, "phase Picard iteration did not reach the tolerance");
  // The confirmed iterate agrees with the causal sweep to picard_tol; stored gamma fields are refreshed.
  for (auto& [t, field] : track.gamma_fields) {
    const auto k = static_cast<std::size_t>(std::llround(t / options.sample_dt));
    if (k < n) field = im.split->synthesize(g[k]);
  }
  for (auto& [t, field] : track.gamma_t_fields) {
    const auto k = static_cast<std::size_t>(std::llround(t / options.sample_dt));
    if (k < n) field = im.split->synthesize(gd[k]);
  }
  return track;
}

}  // namespace lle
