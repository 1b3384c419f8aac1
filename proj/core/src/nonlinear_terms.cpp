#include "lle/nonlinear_terms.hpp"

#include <cmath>
#include <sstream>

#include "lle/error.hpp"
#include "lle/spectral.hpp"

namespace lle {
namespace {

constexpr cd kI(0.0, 1.0);

// i(2 Re(conj(b) w) w + |w|^2 b + |w|^2 w): the exact remainder of the cubic expansion.
inline cd r1_point(cd b, cd w) {
  const double cross = 2.0 * (std::conj(b) * w).real();
  const double ww = std::norm(w);
  return kI * (cross * w + ww * b + ww * w);
}

void same_grid(const RealPairField& a, const RealPairField& b, const char* what) {
  if (!(a.grid() == b.grid())) fail(ErrorCode::InvalidArgument, std::string(what) + ": grid mismatch");
}

ScalarField map2(const ScalarField& a, auto&& f) {
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(i);
  return out;
}

}  // namespace

TermKind parse_term_kind(const std::string& name) {
  static const std::pair<const char*, TermKind> table[] = {
      {"R1", TermKind::R1}, {"R21", TermKind::R21}, {"R22", TermKind::R22}, {"R2", TermKind::R2},
      {"Q", TermKind::Q},   {"S", TermKind::S},     {"P", TermKind::P},     {"T", TermKind::T},
      {"R4", TermKind::R4}, {"R5", TermKind::R5}};
  for (const auto& [key, kind] : table)
    if (name == key) return kind;
  fail(ErrorCode::InvalidArgument, "unknown nonlinear term '" + name + "'");
}

std::string to_string(TermKind kind) {
  switch (kind) {
    case TermKind::R1: return "R1";
    case TermKind::R21: return "R21";
    case TermKind::R22: return "R22";
    case TermKind::R2: return "R2";
    case TermKind::Q: return "Q";
    case TermKind::S: return "S";
    case TermKind::P: return "P";
    case TermKind::T: return "T";
    case TermKind::R4: return "R4";
    case TermKind::R5: return "R5";
  }
  return "?";
}

RealPairField r1(const RealPairField& base, const RealPairField& w) {
  same_grid(base, w, "R1");
  RealPairField out(w.grid());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = r1_point(base[i], w[i]);
  return out;
}

RealPairField r21(const RealPairField& base, const RealPairField& w, const RealPairField& v) {
  same_grid(base, w, "R21");
  same_grid(base, v, "R21");
  RealPairField out(v.grid());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = r1_point(base[i] + w[i], v[i]);
  return out;
}

RealPairField r22(const RealPairField& base, const RealPairField& w, const RealPairField& v) {
  same_grid(base, w, "R22");
  same_grid(base, v, "R22");
  RealPairField out(v.grid());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const cd b = base[i], d = w[i], z = v[i];
    const double dmod = 2.0 * (std::conj(b) * d).real() + std::norm(d);
    out[i] = kI * (2.0 * dmod * z + (2.0 * b * d + d * d) * std::conj(z));
  }
  return out;
}

RealPairField r2(const RealPairField& base, const RealPairField& w, const RealPairField& v) {
  return r1(base, v + w) - r1(base, w);
}

PhaseFields PhaseFields::from_gamma(const ScalarField& gamma, const ScalarField& gamma_t) {
  PhaseFields g;
  g.gamma_x = spectral_derivative(gamma, 1);
  g.gamma_xx = spectral_derivative(gamma, 2);
  g.gamma_t = gamma_t;
  return g;
}

PhaseFields PhaseFields::zero(const PeriodicGrid& grid) {
  return PhaseFields{ScalarField(grid), ScalarField(grid), ScalarField(grid)};
}

void check_denominator(const ScalarField& gamma_x) {
  for (std::size_t i = 0; i < gamma_x.size(); ++i)
    if (gamma_x[i] >= 1.0) {
      std::ostringstream os;
      os << "gamma_x reached " << gamma_x[i] << " at x=" << gamma_x.grid().x(i);
      fail(ErrorCode::SingularDenominator, os.str());
    }
}

RealPairField q_term(const RealPairField& phi, const RealPairField& hat_w, const RealPairField& hat_v,
                     const PhaseFields& g) {
  const ScalarField one_minus = map2(g.gamma_x, [&](std::size_t i) { return 1.0 - g.gamma_x[i]; });
  return multiply(one_minus, r21(phi, hat_w, hat_v));
}

RealPairField s_term(const RealPairField& phi_prime, const RealPairField& hat_v, const PhaseFields& g, int beta) {
  check_denominator(g.gamma_x);
  RealPairField out(hat_v.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double gx = g.gamma_x[i];
    const double d = 1.0 - gx;
    const cd inner = g.gamma_xx[i] / (d * d) * hat_v[i] - gx * gx / d * phi_prime[i];
    out[i] = -g.gamma_t[i] * hat_v[i] + static_cast<double>(beta) * kI * inner;
  }
  return out;
}

RealPairField p_term(const RealPairField& hat_v, const PhaseFields& g, int beta) {
  check_denominator(g.gamma_x);
  RealPairField out(hat_v.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double gx = g.gamma_x[i];
    out[i] = -static_cast<double>(beta) * kI * (gx + gx / (1.0 - gx)) * hat_v[i];
  }
  return out;
}

RealPairField t_term(const RealPairField& phi, const RealPairField& hat_w, const PhaseFields& g, int beta) {
  check_denominator(g.gamma_x);
  const std::size_t n = hat_w.size();
  const RealPairField r = r1(phi, hat_w);
  RealPairField first(hat_w.grid()), second(hat_w.grid()), out(hat_w.grid());
  for (std::size_t i = 0; i < n; ++i) {
    const double gx = g.gamma_x[i];
    const double d = 1.0 - gx;
    first[i] = g.gamma_t[i] * hat_w[i] - static_cast<double>(beta) * kI * (g.gamma_xx[i] / (d * d)) * hat_w[i];
    second[i] = static_cast<double>(beta) * kI * (gx + gx / d) * hat_w[i];
    out[i] = -gx * r[i];
  }
  out -= spectral_derivative(first, 1);
  out -= spectral_derivative(second, 2);
  return out;
}

RealPairField r3(const RealPairField& phi, const RealPairField& phi_prime, const RealPairField& hat_w,
                 const RealPairField& hat_v, const PhaseFields& g, int beta) {
  RealPairField out = q_term(phi, hat_w, hat_v, g);
  out += spectral_derivative(s_term(phi_prime, hat_v, g, beta), 1);
  out += spectral_derivative(p_term(hat_v, g, beta), 2);
  return out;
}

RealPairField r4(const RealPairField& phi, const RealPairField& shifted, const RealPairField& ring_w) {
  same_grid(phi, shifted, "R4");
  same_grid(phi, ring_w, "R4");
  RealPairField out(ring_w.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cd p = phi[i], s = shifted[i], z = ring_w[i];
    // N'(p) z - N'(s) z = i(2(|p|^2 - |s|^2) z + (p^2 - s^2) conj(z))
    const cd dn = kI * (2.0 * (std::norm(p) - std::norm(s)) * z + (p * p - s * s) * std::conj(z));
    out[i] = r1_point(s, z) - dn;
  }
  return out;
}

RealPairField r5(const ForwardComposition& c, const PhaseFields& g, int beta) {
  const std::size_t n = g.gamma_x.size();
  RealPairField out(g.gamma_x.grid());
  for (std::size_t i = 0; i < n; ++i) {
    const double gx = g.gamma_x[i];
    const double stretch = 2.0 * gx + gx * gx;
    const cd wx = c.tilde_w_x[i], wxx = c.tilde_w_xx[i], px = c.phi_x[i], pxx = c.phi_xx[i];
    const cd disp = wx * g.gamma_xx[i] + wxx * stretch + px * g.gamma_xx[i] + pxx * stretch;
    out[i] = -wx * g.gamma_t[i] - px * g.gamma_t[i] - static_cast<double>(beta) * kI * disp;
  }
  return out;
}

RealPairField evaluate_term(TermKind kind, const TermInputs& in) {
  switch (kind) {
    case TermKind::R1: return r1(in.base, in.w);
    case TermKind::R21: return r21(in.base, in.w, in.v);
    case TermKind::R22: return r22(in.base, in.w, in.v);
    case TermKind::R2: return r2(in.base, in.w, in.v);
    case TermKind::Q: return q_term(in.base, in.w, in.v, in.phase);
    case TermKind::S: return s_term(in.base_prime, in.v, in.phase, in.beta);
    case TermKind::P: return p_term(in.v, in.phase, in.beta);
    case TermKind::T: return t_term(in.base, in.w, in.phase, in.beta);
    case TermKind::R4: return r4(in.base, in.shifted, in.w);
    case TermKind::R5: return r5(in.forward, in.phase, in.beta);
  }
  fail(ErrorCode::InvalidArgument, "unknown nonlinear term");
}

}  // namespace lle
