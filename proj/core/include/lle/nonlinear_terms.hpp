#pragma once

#include <string>

#include "lle/grid.hpp"
#include "lle/parameters.hpp"

namespace lle {

enum class TermKind { R1, R21, R22, R2, Q, S, P, T, R4, R5 };

TermKind parse_term_kind(const std::string& name);
std::string to_string(TermKind kind);

// R1(base)(w) = N(w + base) - N(base) - N'(base) w, expanded so that no cancellation occurs.
RealPairField r1(const RealPairField& base, const RealPairField& w);
// N(v + w + base) - N(w + base) - N'(w + base) v.
RealPairField r21(const RealPairField& base, const RealPairField& w, const RealPairField& v);
// (N'(w + base) - N'(base)) v.
RealPairField r22(const RealPairField& base, const RealPairField& w, const RealPairField& v);
// R1(base)(v + w) - R1(base)(w).
RealPairField r2(const RealPairField& base, const RealPairField& w, const RealPairField& v);

// Phase derivatives entering the inverse-modulated system; all on one grid.
struct PhaseFields {
  ScalarField gamma_x;
  ScalarField gamma_xx;
  ScalarField gamma_t;

  static PhaseFields from_gamma(const ScalarField& gamma, const ScalarField& gamma_t);
  static PhaseFields zero(const PeriodicGrid& grid);
};

// Throws SingularDenominator if some gamma_x reaches 1.
void check_denominator(const ScalarField& gamma_x);

// (1 - gamma_x) R21(hat_w, hat_v).
RealPairField q_term(const RealPairField& phi, const RealPairField& hat_w, const RealPairField& hat_v,
                     const PhaseFields& g);
// -gamma_t hat_v + beta J(gamma_xx / (1 - gamma_x)^2 hat_v - gamma_x^2 / (1 - gamma_x) phi').
RealPairField s_term(const RealPairField& phi_prime, const RealPairField& hat_v, const PhaseFields& g, int beta);
// -beta J(gamma_x + gamma_x / (1 - gamma_x)) hat_v.
RealPairField p_term(const RealPairField& hat_v, const PhaseFields& g, int beta);
RealPairField t_term(const RealPairField& phi, const RealPairField& hat_w, const PhaseFields& g, int beta);
// Q + d/dx S + d^2/dx^2 P.
RealPairField r3(const RealPairField& phi, const RealPairField& phi_prime, const RealPairField& hat_w,
                 const RealPairField& hat_v, const PhaseFields& g, int beta);

// R1(shifted)(ring_w) - (N'(phi) - N'(shifted)) ring_w with shifted = phi(. + sigma).
RealPairField r4(const RealPairField& phi, const RealPairField& shifted, const RealPairField& ring_w);

// Inputs of R5 evaluated at x + gamma(x): derivatives of w-tilde and of phi.
struct ForwardComposition {
  RealPairField tilde_w_x;
  RealPairField tilde_w_xx;
  RealPairField phi_x;
  RealPairField phi_xx;
};
RealPairField r5(const ForwardComposition& c, const PhaseFields& g, int beta);

// Generic dispatch for the command line and the scaling checks; unused inputs may be empty.
struct TermInputs {
  RealPairField base;       // phi, or phi composed with the phase for the forward system
  RealPairField base_prime;
  RealPairField shifted;    // phi(. + sigma) for R4
  RealPairField w;
  RealPairField v;
  PhaseFields phase;
  ForwardComposition forward;
  int beta = -1;
};
RealPairField evaluate_term(TermKind kind, const TermInputs& in);

}  // namespace lle
