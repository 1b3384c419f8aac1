#pragma once

#include "lle/grid.hpp"
#include "lle/spectral.hpp"
#include "lle/waves.hpp"

namespace lle {

// Synthetic state at one instant with exact time derivatives. u, u_t, gamma and gamma_t live on the
// full domain; w and w_t on one period. Nothing forces u or w to solve the evolution equation.
struct ManufacturedFields {
  RealPairField u, u_t;
  RealPairField w, w_t;
  double sigma = 0.0, sigma_t = 0.0;
  ScalarField gamma, gamma_t;
};

struct IdentityOptions {
  bool retain_sigma_t_w_term = false;  // keep the sigma_t hat_w_x term that cancels in the derivation
  bool include_defect = true;          // account for u and w not solving the equation
  EvaluationMethod method = EvaluationMethod::Automatic;
};

struct IdentityResult {
  double residual_l2 = 0.0;
  double lhs_l2 = 0.0;
  double rhs_l2 = 0.0;
  double defect_l2 = 0.0;
  double retained_term_l2 = 0.0;
};

// (d_t - L0)(hat_v + phi' gamma - gamma_x (hat_w + hat_v)) against
// R3 - sigma_t hat_v_x + (1 - gamma_x) R22(hat_w, hat_v) + T.
IdentityResult residual_identity_inverse(const ManufacturedFields& m, const WaveProfile& wave,
                                         const IdentityOptions& options = {});

// (d_t - L0(ring_phi)) ring_v against R2(ring_phi)(tilde_w(. + gamma), ring_v) + R5.
IdentityResult residual_identity_forward(const ManufacturedFields& m, const WaveProfile& wave,
                                         const IdentityOptions& options = {});

// R5 for w = phi by differentiating phi(x + gamma) directly: D(phi o) - (D phi) o - phi' o gamma_t.
RealPairField r5_chain_rule(const WaveProfile& wave, const ScalarField& gamma, const ScalarField& gamma_t);
// The same quantity through the closed-form R5 expression.
RealPairField r5_direct(const WaveProfile& wave, const ScalarField& gamma, const ScalarField& gamma_t);

struct ManufactureSpec {
  std::size_t num_cells = 4;
  std::size_t points_per_cell = 256;
  double time = 1.5;
  double gamma_x_sup = 0.3;
  double sigma_amplitude = 0.05;
  double w_amplitude = 0.02;
  double v_amplitude = 0.05;
  bool zero_phase = false;  // sigma = gamma = 0
};

// Band-limited analytic fields with closed-form time dependence.
ManufacturedFields manufacture(const WaveProfile& wave, const ManufactureSpec& spec);

}  // namespace lle
