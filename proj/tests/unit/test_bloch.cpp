#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lle/bloch.hpp"
#include "lle/cutoff.hpp"
#include "lle/dense_eigen.hpp"
#include "lle/diagnostics.hpp"
#include "lle/error.hpp"
#include "lle/evolution.hpp"
#include "lle/spectral.hpp"
#include "lle/waves.hpp"

using namespace lle;
namespace {
constexpr double pi = std::numbers::pi;

const WaveProfile& wave() {
  static const WaveProfile w = [] {
    WaveParameters p;
    p.period = 2 * pi;
    return construct_wave(p, 64, {0.6, 0.3, 1.0});
  }();
  return w;
}

const BlochSpectrumReport& report() {
  static const BlochSpectrumReport r = [] {
    BlochOptions o;
    o.threads = 4;
    return verify_assumptions(wave(), 32, o);
  }();
  return r;
}

const ZeroModeData& zero_mode() {
  static const ZeroModeData z = compute_zero_mode(wave());
  return z;
}

RealPairField random_cell(std::uint64_t seed) { return random_coperiodic(wave().grid(), 1.0, 6, seed); }

WaveProfile constant_profile(double forcing, std::size_t n) {
  WaveParameters p;
  p.period = 2 * pi;
  p.forcing = forcing;
  const auto s = homogeneous_states(p).back();
  const PeriodicGrid g(n, p.period);
  return WaveProfile::from_samples(p, RealPairField::sample(g, [&](double) { return s.value; }));
}

// Eigenvalues -1 +- sqrt(rho^2 - (beta k^2 - alpha + 2 rho)^2) over the labels of one fiber.
std::vector<cd> constant_spectrum(const WaveProfile& w, double xi) {
  const auto& p = w.params;
  double rho = std::norm(w.profile[0]);
  const std::size_t n = w.profile.size();
  std::vector<cd> out;
  const long first = first_label(xi, n);
  for (std::size_t a = 0; a < n; ++a) {
    const double k = xi + 2 * pi * static_cast<double>(first + static_cast<long>(a)) / p.period;
    const double d = p.beta * k * k - p.alpha + 2 * rho;
    const cd r = std::sqrt(cd(rho * rho - d * d, 0));
    out.push_back(-1.0 + r);
    out.push_back(-1.0 - r);
  }
  return out;
}

double match_spectra(std::vector<cd> a, std::vector<cd> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0;
  for (const cd& z : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](cd x, cd y) { return std::abs(x - z) < std::abs(y - z); });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}
}  // namespace

TEST_CASE("zero profile spectrum is -1 +- i(beta q^2 - alpha)") {
  WaveParameters p;
  p.period = 2 * pi;
  p.forcing = 0;
  const PeriodicGrid g(32, p.period);
  const auto w = WaveProfile::from_samples(p, RealPairField(g));
  for (double xi : {0.0, 0.23, -0.4}) {
    const auto m = assemble_bloch(w, xi);
    const auto dec = eigen_decompose(m.matrix, false);
    std::vector<cd> got(dec.values.data(), dec.values.data() + dec.values.size());
    CHECK(match_spectra(got, constant_spectrum(w, xi)) <= 1e-10);
  }
}

TEST_CASE("constant state spectrum follows the modulational dispersion relation") {
  const auto w = constant_profile(1.1, 32);
  for (double xi : {0.0, 0.3}) {
    const auto dec = eigen_decompose(assemble_bloch(w, xi).matrix, false);
    std::vector<cd> got(dec.values.data(), dec.values.data() + dec.values.size());
    CHECK(match_spectra(got, constant_spectrum(w, xi)) <= 1e-9);
  }
}

TEST_CASE("translation mode spans the kernel of L(0)") {
  const auto m = assemble_bloch(wave(), 0.0);
  const auto dec = eigen_decompose(m.matrix, true);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < dec.values.size(); ++i)
    if (std::abs(dec.values(i)) < std::abs(dec.values(k))) k = i;
  CHECK(std::abs(dec.values(k)) <= 1e-8);
  const Eigen::VectorXcd phi_prime = to_fourier_vector(wave().derivative);
  const double cosine = std::abs(phi_prime.dot(dec.vectors.col(k))) / (phi_prime.norm() * dec.vectors.col(k).norm());
  CHECK(cosine >= 1 - 1e-6);
  CHECK((m.matrix * phi_prime).norm() <= 1e-8 * phi_prime.norm());
}

TEST_CASE("default wave satisfies the spectral assumptions") {
  const auto& r = report();
  CHECK(r.d1_ok);
  CHECK(r.d2_ok);
  CHECK(r.d3_ok);
  CHECK(r.theta_fit > 0);
  CHECK(r.gap_delta0 > 0);
  CHECK(r.kernel_residual <= 1e-8);
  CHECK(r.near_zero_count == 1);
  CHECK(std::abs(r.zero_eigenvalue) <= 1e-8);
  CHECK(std::abs(r.curve_slope_at_zero.real()) <= 1e-6);
  CHECK(r.cutoff_xi0 > 0);
  for (const auto& s : r.critical_curve) CHECK(s.lambda.real() <= -r.theta_fit * s.xi * s.xi + r.fit_tol);
}

TEST_CASE("MI-unstable constant state fails D1 with a witness") {
  BlochOptions o;
  o.threads = 2;
  const auto r = verify_assumptions(constant_profile(1.1, 32), 16, o);
  CHECK_FALSE(r.d1_ok);
  REQUIRE(r.d1_witness.has_value());
  CHECK(r.d1_witness->real() > 0);
  CHECK_FALSE(r.assumptions_hold());
}

TEST_CASE("adjoint zero mode and spectral projection") {
  const auto& zm = zero_mode();
  CHECK(std::abs(inner_product(zm.adjoint_mode, zm.phi_prime) - 1.0) <= 1e-10);
  CHECK(zm.adjoint_residual <= 1e-8);
  CHECK(projection_coefficient(zm, zm.phi_prime) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(norm(projection_pi0(zm, zm.phi_prime) - zm.phi_prime, NormKind::Linf) <= 1e-10);

  RealPairField g = random_cell(3);
  g -= projection_coefficient(zm, g) * zm.phi_prime;
  CHECK(norm(projection_pi0(zm, g), NormKind::Linf) <= 1e-10);

  const auto h = random_cell(4);
  const auto p1 = projection_pi0(zm, h);
  CHECK(norm(projection_pi0(zm, p1) - p1, NormKind::Linf) <= 1e-10);
}

TEST_CASE("periodic semigroup") {
  const PeriodicSemigroup s(wave(), zero_mode());
  const auto g = random_cell(5);
  CHECK(norm(s.apply(g, 0.0, true) - g, NormKind::Linf) <= 1e-12);

  const auto a = s.apply(s.apply(g, 1.5, false), 2.0, false);
  const auto b = s.apply(g, 3.5, false);
  CHECK(norm(a - b, NormKind::L2) <= 1e-8 * norm(g, NormKind::L2));

  const double t_late = 2 + 20 / report().gap_delta0;
  CHECK(norm(s.apply(zero_mode().phi_prime, t_late, true), NormKind::L2) <= 1e-8);

  std::vector<double> t, y;
  for (double tk = 2; tk <= 20; tk += 0.5) {
    t.push_back(tk);
    y.push_back(norm(s.apply(g, tk, true), NormKind::L2));
  }
  const auto fit = fit_decay(t, y, DecayModel::Exponential);
  CHECK(std::abs(fit.rate - report().gap_delta0) <= 0.15 * report().gap_delta0);
}

TEST_CASE("critical split") {
  const CriticalModeSplit split(wave(), report(), 8);
  const auto& full = split.grid();
  const auto g = localized_phase_bump(wave(), full, 1.0, full.length() / 2, 2 * wave().params.period) +
                 tile(random_cell(6), full);

  SUBCASE("s_p vanishes before the temporal cutoff") {
    const auto [sp, rest] = apply_sp_and_s2(split, g, 0.5);
    CHECK(sp.max_abs() == 0.0);
    CHECK(norm(rest - split.apply_semigroup(g, 0.5), NormKind::Linf) <= 1e-12);
  }
  SUBCASE("phi' s_p + S2 reproduces the semigroup") {
    for (double t : {1.5, 4.0}) {
      const auto [sp, rest] = apply_sp_and_s2(split, g, t);
      const auto phi_prime_full = tile(wave().derivative, full);
      const auto sum = multiply(sp, phi_prime_full) + rest;
      const auto full_sg = split.apply_semigroup(g, t);
      CHECK(norm(sum - full_sg, NormKind::L2) <= 1e-8 * norm(full_sg, NormKind::L2));
    }
  }
  SUBCASE("cutoffs") {
    CHECK(temporal_cutoff(0.9) == 0.0);
    CHECK(temporal_cutoff(2.1) == 1.0);
    CHECK(frequency_cutoff(0.0, split.cutoff_xi0()) == 1.0);
  }
}

TEST_CASE("union of Bloch spectra matches the full-domain spectrum") {
  const auto u = check_union_property(wave(), 4);
  CHECK(u.matched > 0);
  CHECK(u.max_mismatch <= 1e-6);
}
