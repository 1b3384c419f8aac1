#include "lle/identities.hpp"

#include <cmath>
#include <numbers>

#include "lle/error.hpp"
#include "lle/nonlinear_terms.hpp"
#include "lle/operators.hpp"

namespace lle {
namespace {

RealPairField cell_wave(const WaveProfile& wave, const PeriodicGrid& cell) {
  require(std::abs(cell.cell_period() - wave.grid().cell_period()) < 1e-12 * cell.cell_period(),
          "identity check: period of the fields differs from the wave period");
  if (cell.num_points() == wave.grid().num_points()) return wave.profile;
  return resample(wave.profile, cell.num_points());
}

ScalarField one_minus(const ScalarField& g) {
  ScalarField out(g.grid());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = 1.0 - g[i];
  return out;
}

// D(u) = J(-beta u_xx - alpha u) - u.
RealPairField linear_part(const RealPairField& u, const WaveParameters& p) {
  const RealPairField uxx = spectral_derivative(u, 2);
  RealPairField out(u.grid());
  const cd i(0.0, 1.0);
  for (std::size_t j = 0; j < u.size(); ++j)
    out[j] = i * (-static_cast<double>(p.beta) * uxx[j] - p.alpha * u[j]) - u[j];
  return out;
}

void check_fields(const ManufacturedFields& m) {
  const PeriodicGrid& full = m.u.grid();
  require(m.u_t.grid() == full && m.gamma.grid() == full && m.gamma_t.grid() == full,
          "identity check: u, u_t, gamma and gamma_t must share the full grid");
  require(m.w.grid() == m.w_t.grid(), "identity check: w and w_t grids differ");
  require(m.w.grid() == full.cell_grid(), "identity check: w must live on one period of the full grid");
}

}  // namespace

IdentityResult residual_identity_inverse(const ManufacturedFields& m, const WaveProfile& wave,
                                         const IdentityOptions& options) {
  check_fields(m);
  const PeriodicGrid& full = m.u.grid();
  const WaveParameters& p = wave.params;
  const RealPairField phi = cell_wave(wave, m.w.grid());
  const RealPairField phi_full = tile(phi, full);
  const RealPairField phi_prime_full = tile(spectral_derivative(phi, 1), full);
  const PhaseFields ph = PhaseFields::from_gamma(m.gamma, m.gamma_t);
  const ScalarField gamma_xt = spectral_derivative(m.gamma_t, 1);
  const ScalarField shift = -1.0 * m.gamma;

  auto at_psi = [&](const RealPairField& f) { return compose(f, full, shift, -m.sigma, options.method); };
  const RealPairField u_psi = at_psi(m.u);
  const RealPairField ux_psi = at_psi(spectral_derivative(m.u, 1));
  const RealPairField ut_psi = at_psi(m.u_t);

  const RealPairField w_s = translate(m.w, -m.sigma);
  const RealPairField wx_s = translate(spectral_derivative(m.w, 1), -m.sigma);
  const RealPairField wt_s = translate(m.w_t, -m.sigma);
  const RealPairField hat_w_cell = w_s - phi;
  const RealPairField hat_w_t_cell = wt_s - m.sigma_t * wx_s;
  const RealPairField hat_w = tile(hat_w_cell, full);
  const RealPairField hat_w_t = tile(hat_w_t_cell, full);

  const RealPairField hat_v = u_psi - tile(w_s, full);
  ScalarField speed = m.gamma_t;
  for (std::size_t i = 0; i < speed.size(); ++i) speed[i] += m.sigma_t;
  const RealPairField hat_v_t = ut_psi - multiply(speed, ux_psi) - hat_w_t;

  const RealPairField sum = hat_w + hat_v;
  const RealPairField big_psi = hat_v + multiply(m.gamma, phi_prime_full) - multiply(ph.gamma_x, sum);
  const RealPairField big_psi_t = hat_v_t + multiply(m.gamma_t, phi_prime_full) - multiply(gamma_xt, sum) -
                                  multiply(ph.gamma_x, hat_w_t + hat_v_t);
  const RealPairField lhs = big_psi_t - apply_linearization(phi_full, big_psi, p);

  RealPairField rhs = r3(phi_full, phi_prime_full, hat_w, hat_v, ph, p.beta);
  rhs -= m.sigma_t * spectral_derivative(hat_v, 1);
  rhs += multiply(one_minus(ph.gamma_x), r22(phi_full, hat_w, hat_v));
  rhs += t_term(phi_full, hat_w, ph, p.beta);

  IdentityResult r;
  if (options.retain_sigma_t_w_term) {
    const RealPairField retained = m.sigma_t * spectral_derivative(hat_w, 1);
    r.retained_term_l2 = norm(retained, NormKind::L2);
    rhs += retained;
  }
  RealPairField residual = lhs - rhs;
  if (options.include_defect) {
    const RealPairField f_u = m.u_t - stationary_residual(m.u, p);
    const RealPairField f_w = m.w_t - stationary_residual(m.w, p);
    const RealPairField defect =
        multiply(one_minus(ph.gamma_x), at_psi(f_u)) - tile(translate(f_w, -m.sigma), full);
    r.defect_l2 = norm(defect, NormKind::L2);
    residual -= defect;
  }
  r.lhs_l2 = norm(lhs, NormKind::L2);
  r.rhs_l2 = norm(rhs, NormKind::L2);
  r.residual_l2 = norm(residual, NormKind::L2);
  return r;
}

IdentityResult residual_identity_forward(const ManufacturedFields& m, const WaveProfile& wave,
                                         const IdentityOptions& options) {
  check_fields(m);
  const PeriodicGrid& full = m.u.grid();
  const WaveParameters& p = wave.params;
  const RealPairField phi = cell_wave(wave, m.w.grid());
  const PhaseFields ph = PhaseFields::from_gamma(m.gamma, m.gamma_t);
  auto at_gamma = [&](const RealPairField& f) { return compose(f, full, m.gamma, 0.0, options.method); };

  const RealPairField phi_x = spectral_derivative(phi, 1), phi_xx = spectral_derivative(phi, 2);
  const RealPairField w_x = spectral_derivative(m.w, 1), w_xx = spectral_derivative(m.w, 2);
  const RealPairField ring_phi = at_gamma(phi);
  const RealPairField phi_x_o = at_gamma(phi_x), phi_xx_o = at_gamma(phi_xx);
  const RealPairField w_o = at_gamma(m.w), w_x_o = at_gamma(w_x), w_xx_o = at_gamma(w_xx);

  const RealPairField ring_v = m.u - w_o;
  const RealPairField ring_v_t = m.u_t - at_gamma(m.w_t) - multiply(m.gamma_t, w_x_o);
  const RealPairField lhs = ring_v_t - apply_linearization(ring_phi, ring_v, p);

  const ForwardComposition fc{w_x_o - phi_x_o, w_xx_o - phi_xx_o, phi_x_o, phi_xx_o};
  const RealPairField rhs = r2(ring_phi, w_o - ring_phi, ring_v) + r5(fc, ph, p.beta);

  IdentityResult r;
  RealPairField residual = lhs - rhs;
  if (options.include_defect) {
    const RealPairField f_u = m.u_t - stationary_residual(m.u, p);
    const RealPairField f_w = m.w_t - stationary_residual(m.w, p);
    const RealPairField defect = f_u - at_gamma(f_w);
    r.defect_l2 = norm(defect, NormKind::L2);
    residual -= defect;
  }
  r.lhs_l2 = norm(lhs, NormKind::L2);
  r.rhs_l2 = norm(rhs, NormKind::L2);
  r.residual_l2 = norm(residual, NormKind::L2);
  return r;
}

RealPairField r5_chain_rule(const WaveProfile& wave, const ScalarField& gamma, const ScalarField& gamma_t) {
  const PeriodicGrid& full = gamma.grid();
  const RealPairField phi = cell_wave(wave, full.cell_grid());
  const RealPairField ring_phi = compose(phi, full, gamma);
  RealPairField out = linear_part(ring_phi, wave.params);
  out -= compose(linear_part(phi, wave.params), full, gamma);
  out -= multiply(gamma_t, compose(spectral_derivative(phi, 1), full, gamma));
  return out;
}

RealPairField r5_direct(const WaveProfile& wave, const ScalarField& gamma, const ScalarField& gamma_t) {
  const PeriodicGrid& full = gamma.grid();
  const RealPairField phi = cell_wave(wave, full.cell_grid());
  const ForwardComposition fc{RealPairField(full), RealPairField(full),
                              compose(spectral_derivative(phi, 1), full, gamma),
                              compose(spectral_derivative(phi, 2), full, gamma)};
  return r5(fc, PhaseFields::from_gamma(gamma, gamma_t), wave.params.beta);
}

ManufacturedFields manufacture(const WaveProfile& wave, const ManufactureSpec& spec) {
  require(spec.num_cells >= 1 && spec.points_per_cell >= 16, "manufacture: grid too small");
  const double period = wave.grid().cell_period();
  const PeriodicGrid full(spec.points_per_cell * spec.num_cells, period, spec.num_cells);
  const PeriodicGrid cell = full.cell_grid();
  const RealPairField phi = cell_wave(wave, cell);
  const double t = spec.time;
  const double kc = 2.0 * std::numbers::pi / period;
  const double kf = 2.0 * std::numbers::pi / full.length();
  const cd i(0.0, 1.0);

  ManufacturedFields m;
  const double wa = spec.w_amplitude * std::exp(-0.3 * t);
  const RealPairField p_shape = RealPairField::sample(cell, [&](double x) {
    return std::cos(kc * x) + 0.5 * i * std::sin(2.0 * kc * x) + 0.3 * std::exp(i * (3.0 * kc * x + 0.4));
  });
  m.w = phi + wa * p_shape;
  m.w_t = (-0.3 * wa) * p_shape;

  const double va = spec.v_amplitude * std::exp(-0.25 * t);
  const RealPairField h_shape = RealPairField::sample(full, [&](double x) {
    cd acc = 0.0;
    for (int k = 1; k <= 6; ++k)
      acc += std::exp(i * (static_cast<double>(k) * kf * x + 0.3 * k)) / static_cast<double>(k * k);
    return acc + 0.2 * std::cos(2.0 * kc * x + kf * x);
  });
  m.u = tile(m.w, full) + va * h_shape;
  m.u_t = tile(m.w_t, full) + (-0.25 * va) * h_shape;

  m.gamma = ScalarField(full);
  m.gamma_t = ScalarField(full);
  if (!spec.zero_phase) {
    m.sigma = spec.sigma_amplitude * std::sin(0.7 * t);
    m.sigma_t = 0.7 * spec.sigma_amplitude * std::cos(0.7 * t);
    ScalarField q(full);
    for (std::size_t j = 0; j < full.num_points(); ++j) {
      const double x = full.x(j);
      q[j] = std::sin(3.0 * kf * x) + 0.4 * std::cos(5.0 * kf * x + 0.7);
    }
    const double qx_sup = spectral_derivative(q, 1).max_abs();
    const double a = spec.gamma_x_sup / qx_sup;
    m.gamma = a * q;
    m.gamma_t = (-0.2 * a) * q;
  }
  return m;
}

}  // namespace lle
