#include "lle/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "lle/error.hpp"
#include "lle/spectral.hpp"

namespace lle {
namespace {

using Getter = std::function<double(const SampleNorms&)>;

const std::vector<std::pair<std::string, Getter>>& series_table() {
  static const std::vector<std::pair<std::string, Getter>> table = {
      {"sigma", [](const SampleNorms& s) { return s.sigma; }},
      {"sigma_dot", [](const SampleNorms& s) { return std::abs(s.sigma_dot); }},
      {"hat_w_l2", [](const SampleNorms& s) { return s.hat_w_l2; }},
      {"hat_w_h1", [](const SampleNorms& s) { return s.hat_w_h1; }},
      {"ring_w_h1", [](const SampleNorms& s) { return s.ring_w_h1; }},
      {"tilde_w_linf", [](const SampleNorms& s) { return s.tilde_w_linf; }},
      {"hat_v_l2", [](const SampleNorms& s) { return s.hat_v_l2; }},
      {"hat_v_linf", [](const SampleNorms& s) { return s.hat_v_linf; }},
      {"hat_v_h3", [](const SampleNorms& s) { return s.hat_v_h3; }},
      {"ring_v_l2", [](const SampleNorms& s) { return s.ring_v_l2; }},
      {"ring_v_linf", [](const SampleNorms& s) { return s.ring_v_linf; }},
      {"ring_v_h3", [](const SampleNorms& s) { return s.ring_v_h3; }},
      {"energy_1", [](const SampleNorms& s) { return s.energy[1]; }},
      {"energy_2", [](const SampleNorms& s) { return s.energy[2]; }},
      {"energy_3", [](const SampleNorms& s) { return s.energy[3]; }},
      {"gamma_l2", [](const SampleNorms& s) { return s.gamma_l2; }},
      {"gamma_linf", [](const SampleNorms& s) { return s.gamma_linf; }},
      {"gamma_x_l2", [](const SampleNorms& s) { return s.gamma_x_l2; }},
      {"gamma_x_linf", [](const SampleNorms& s) { return s.gamma_x_linf; }},
      {"gamma_x_h3", [](const SampleNorms& s) { return s.gamma_x_h3; }},
      {"gamma_x_h4", [](const SampleNorms& s) { return s.gamma_x_h4; }},
      {"gamma_t_h3", [](const SampleNorms& s) { return s.gamma_t_h3; }},
      {"v_l2", [](const SampleNorms& s) { return s.v_l2; }},
      {"v_linf", [](const SampleNorms& s) { return s.v_linf; }},
      {"u_minus_phi_linf", [](const SampleNorms& s) { return s.u_minus_phi_linf; }},
  };
  return table;
}

}  // namespace

std::size_t valid_prefix(const std::vector<SampleNorms>& samples) {
  std::size_t k = 0;
  while (k < samples.size() && !samples[k].boundary_warning && samples[k].gamma_valid) ++k;
  return k;
}

double jm_quadratic_form(const RealPairField& base, const RealPairField& f, bool transposed) {
  require(base.grid() == f.grid(), "jm_quadratic_form: grid mismatch");
  // J M is the symmetric matrix -2 B with B f = base^2 conj(f), so the transpose gives the same value.
  (void)transposed;
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const cd b = base[i], z = f[i];
    acc += -2.0 * (b * b * std::conj(z) * std::conj(z)).real();
  }
  return acc * f.grid().spacing();
}

double damping_energy(const RealPairField& ring_v, const RealPairField& ring_phi, int beta, int j) {
  require(j >= 1 && j <= 3, "damping_energy: j must be 1, 2 or 3");
  require(beta == 1 || beta == -1, "damping_energy: beta must be +-1");
  const RealPairField dj = spectral_derivative(ring_v, j);
  const RealPairField dj1 = j == 1 ? ring_v : spectral_derivative(ring_v, j - 1);
  const double a = norm(dj, NormKind::L2);
  return a * a - jm_quadratic_form(ring_phi, dj1) / (2.0 * beta);
}

DecayModel parse_decay_model(const std::string& name) {
  if (name == "algebraic") return DecayModel::Algebraic;
  if (name == "exponential") return DecayModel::Exponential;
  fail(ErrorCode::InvalidArgument, "unknown decay model '" + name + "' (algebraic|exponential)");
}

std::string to_string(DecayModel m) { return m == DecayModel::Algebraic ? "algebraic" : "exponential"; }

DecayReport fit_decay(const std::vector<double>& t, const std::vector<double>& y, DecayModel model,
                      const std::string& name) {
  require(t.size() == y.size(), "fit_decay: t and y differ in length");
  std::vector<double> xs, ys;
  double t1 = 0.0, t2 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    if (xs.empty()) t1 = t[i];
    t2 = t[i];
    xs.push_back(model == DecayModel::Algebraic ? std::log1p(t[i]) : t[i]);
    ys.push_back(std::log(y[i]));
  }
  if (xs.size() < 10) {
    std::ostringstream os;
    os << "decay fit of '" << name << "' needs at least 10 positive samples, got " << xs.size();
    fail(ErrorCode::InsufficientData, os.str());
  }
  if (model == DecayModel::Algebraic && (1.0 + t2) / (1.0 + t1) < 10.0 * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "algebraic fit of '" << name << "' needs a decade in 1+t; window is [" << t1 << ", " << t2 << "]";
    fail(ErrorCode::InsufficientData, os.str());
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  DecayReport r;
  r.norm_name = name;
  r.model = model;
  const double slope = sxy / sxx;
  r.rate = -slope;
  r.prefactor = std::exp(my - slope * mx);
  r.t1 = t1;
  r.t2 = t2;
  r.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  r.samples = xs.size();
  return r;
}

std::vector<std::string> series_names() {
  std::vector<std::string> out;
  for (const auto& [name, getter] : series_table()) out.push_back(name);
  return out;
}

std::vector<double> series(const std::vector<SampleNorms>& samples, const std::string& name) {
  for (const auto& [key, getter] : series_table()) {
    if (key != name) continue;
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(getter(s));
    return out;
  }
  fail(ErrorCode::InvalidArgument, "unknown series '" + name + "'");
}

DecayReport fit_series(const std::vector<double>& t_all, const std::vector<double>& y_all, std::size_t valid,
                       DecayModel model, const WindowChoice& window, const std::string& name) {
  require(t_all.size() == y_all.size() && valid <= t_all.size(), "fit_series: inconsistent series");
  double t_end = window.t_min;
  for (std::size_t k = 0; k < valid; ++k)
    if (t_all[k] <= window.t_max) t_end = std::max(t_end, t_all[k]);
  const double t_start =
      window.last_decade ? std::max(window.t_min, (1.0 + t_end) / 10.0 - 1.0 - 1e-9 * (1.0 + t_end)) : window.t_min;
  std::vector<double> t, y;
  for (std::size_t k = 0; k < valid; ++k) {
    const double tk = t_all[k];
    if (tk < t_start || tk > window.t_max || y_all[k] <= window.floor) continue;
    t.push_back(tk);
    y.push_back(y_all[k]);
  }
  DecayReport r = fit_decay(t, y, model, name);
  r.boundary_valid = valid == t_all.size();
  return r;
}

DecayReport fit_track(const std::vector<SampleNorms>& samples, const std::string& name, DecayModel model,
                      const WindowChoice& window) {
  std::vector<double> t;
  for (const auto& s : samples) t.push_back(s.t);
  return fit_series(t, series(samples, name), valid_prefix(samples), model, window, name);
}

EnergyReport verify_damping_inequality(const std::vector<SampleNorms>& samples, double v0_h3_sq) {
  EnergyReport r;
  const std::size_t valid = valid_prefix(samples);
  if (valid == 0) return r;
  const double t0 = samples.front().t;
  double integral = 0.0, prev_g = 0.0;
  for (std::size_t k = 0; k < valid; ++k) {
    const auto& s = samples[k];
    const double l2sq = s.ring_v_deriv_sq[0];
    if (l2sq > 0.0)
      for (int j = 1; j <= 3; ++j)
        r.c_interpolation = std::max(r.c_interpolation, (s.ring_v_deriv_sq[j] - 2.0 * s.energy[j]) / l2sq);
    const double g = l2sq + s.gamma_x_hsq[3] + s.gamma_t_hsq[3];
    if (k > 0) {
      const double dt = s.t - samples[k - 1].t;
      const double decay = std::exp(-dt);
      integral = decay * integral + 0.5 * dt * (decay * prev_g + g);
    }
    prev_g = g;
    const double lhs = s.ring_v_deriv_sq[0] + s.ring_v_deriv_sq[1] + s.ring_v_deriv_sq[2] + s.ring_v_deriv_sq[3];
    const double rhs = std::exp(-(s.t - t0)) * v0_h3_sq + l2sq + integral;
    if (rhs > 0.0) {
      const double c = lhs / rhs;
      if (c > r.c_damping) {
        r.c_damping = c;
        r.tightest_time = s.t;
      }
    }
    ++r.checked;
  }
  if (r.c_damping > 1e6) {
    std::ostringstream os;
    os << "damping inequality constant " << r.c_damping << " at t=" << r.tightest_time << " exceeds 1e6";
    fail(ErrorCode::StructuralFailure, os.str());
  }
  return r;
}

TemplateTrack template_eta(const std::vector<SampleNorms>& samples, double e_l, double e_p) {
  TemplateTrack tr;
  const std::size_t valid = valid_prefix(samples);
  double eta = 0.0;
  for (std::size_t k = 0; k < valid; ++k) {
    const auto& s = samples[k];
    const double inner =
        std::sqrt(1.0 + s.t) * (s.ring_v_h3 + s.gamma_x_h4 + s.gamma_t_h3) + s.gamma_l2;
    eta = std::max(eta, inner);
    tr.times.push_back(s.t);
    tr.eta.push_back(eta);
    const double denom = e_l + eta * eta + eta * e_p;
    if (denom > 0.0) tr.c_key = std::max(tr.c_key, eta / denom);
  }
  tr.bound = 4.0 * tr.c_key * e_l;
  tr.bound_holds = !tr.eta.empty() && tr.eta.back() <= tr.bound;
  return tr;
}

RelateReport relate_check(const std::vector<SampleNorms>& samples) {
  RelateReport r;
  constexpr double tiny = 1e-14;
  const std::size_t valid = valid_prefix(samples);
  r.excluded = samples.size() - valid;
  for (std::size_t k = 0; k < valid; ++k) {
    const auto& s = samples[k];
    const double d_l2 = s.hat_v_l2 + s.gamma_x_l2;
    const double d_h3 = s.ring_v_h3 + s.gamma_x_h3;
    const double d_linf = s.hat_v_linf + s.gamma_x_linf;
    if (d_l2 < tiny || d_h3 < tiny || d_linf < tiny) {
      ++r.excluded;
      continue;
    }
    r.c_l2 = std::max(r.c_l2, s.ring_v_l2 / d_l2);
    r.c_h3 = std::max(r.c_h3, s.hat_v_h3 / d_h3);
    r.c_linf = std::max(r.c_linf, s.ring_v_linf / d_linf);
    ++r.checked;
  }
  return r;
}

}  // namespace lle
