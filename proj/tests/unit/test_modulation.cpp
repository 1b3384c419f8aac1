#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "lle/bloch.hpp"
#include "lle/evolution.hpp"
#include "lle/identities.hpp"
#include "lle/modulation.hpp"
#include "lle/nonlinear_terms.hpp"
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

const ZeroModeData& zero_mode() {
  static const ZeroModeData z = compute_zero_mode(wave());
  return z;
}

RealPairField random_field(const PeriodicGrid& g, std::uint64_t seed, double size) {
  return random_coperiodic(g, size, static_cast<long>(g.num_points() / 8), seed);
}

ScalarField smooth_phase(const PeriodicGrid& g, double amplitude) {
  ScalarField s(g);
  const double L = g.length();
  for (std::size_t i = 0; i < g.num_points(); ++i) {
    const double x = g.x(i);
    s.values()[i] = amplitude * std::exp(-4 * (1 + std::cos(2 * pi * x / L)));
  }
  return s;
}

ScalarField negated(ScalarField s) {
  for (auto& v : s.values()) v = -v;
  return s;
}
}  // namespace

TEST_CASE("left-corrected quadrature is fourth order for integrands flat at the right end") {
  auto integrate = [](std::size_t k) {
    const double t = 3.0, dt = t / static_cast<double>(k);
    double acc = 0;
    for (std::size_t j = 0; j <= k; ++j) {
      const double s = static_cast<double>(j) * dt;
      acc += left_corrected_weight(j, k) * dt * std::exp(-s) * std::pow(1 - s / t, 8);
    }
    return acc;
  };
  const double ref = integrate(20000);
  const double e1 = std::abs(integrate(40) - ref), e2 = std::abs(integrate(80) - ref);
  CHECK(e1 / e2 >= 12);
  CHECK(left_corrected_weight(0, 0) == 0.0);
}

TEST_CASE("phase fit recovers a translation") {
  for (double s0 : {0.0, 0.05, -0.3}) {
    const auto w = translate(wave().profile, s0);
    CHECK(std::abs(fit_phase(w, wave().profile, 0.0) - s0) <= 1e-10);
  }
}

TEST_CASE("sigma extraction") {
  std::vector<double> times;
  for (int k = 0; k <= 300; ++k) times.push_back(0.1 * k);
  SUBCASE("the wave itself has no phase") {
    const std::vector<RealPairField> track(times.size(), wave().profile);
    for (auto method : {SigmaMethod::Projection, SigmaMethod::Fit}) {
      const auto tr = extract_sigma(times, track, wave(), zero_mode(), method);
      for (double s : tr.sigma) CHECK(std::abs(s) <= 1e-12);
    }
  }
  SUBCASE("a translated wave converges to its shift") {
    const double s0 = 0.05;
    const std::vector<RealPairField> track(times.size(), translate(wave().profile, s0));
    const auto proj = extract_sigma(times, track, wave(), zero_mode(), SigmaMethod::Projection);
    const auto fit = extract_sigma(times, track, wave(), zero_mode(), SigmaMethod::Fit);
    CHECK(proj.sigma.front() == 0.0);
    CHECK(std::abs(proj.sigma.back() - s0) <= 0.05 * s0);
    CHECK(std::abs(fit.sigma.back() - s0) <= 1e-10);
    CHECK(std::abs(proj.sigma_star - fit.sigma_star) <= 0.1 * std::abs(fit.sigma_star) + 1e-6);
  }
}

TEST_CASE("modulated perturbations with zero phase") {
  ToothPerturbation tp;
  tp.coperiodic_seed = random_field(wave().grid(), 4, 0.05);
  tp.knocked_out_cells = {2};
  tp.smoothing_width = 0.5;
  tp.depth = 0.3;
  const auto d = make_tooth_data(wave(), tp, 4);
  const auto s = initial_state(wave(), d, 0.01);
  const auto inv = inverse_modulated(s, 0.0, ScalarField(), wave());
  const auto fwd = forward_modulated(s, 0.0, ScalarField(), wave());
  CHECK(norm(inv.hat_w - d.w0, NormKind::Linf) <= 1e-12);
  CHECK(norm(inv.hat_v - d.v0, NormKind::Linf) <= 1e-12);
  CHECK(norm(inv.hat_v, NormKind::H1) == doctest::Approx(norm(fwd.ring_v, NormKind::H1)).epsilon(1e-12));
  CHECK(norm(inv.hat_w, NormKind::H1) == doctest::Approx(norm(fwd.ring_w, NormKind::H1)).epsilon(1e-12));
}

TEST_CASE("inverse perturbations reconstruct the field") {
  ToothPerturbation tp;
  tp.coperiodic_seed = random_field(wave().grid(), 5, 0.05);
  tp.knocked_out_cells = {2};
  tp.smoothing_width = 0.5;
  tp.depth = 0.3;
  const auto d = make_tooth_data(wave(), tp, 4);
  const auto s = initial_state(wave(), d, 0.01);
  const PeriodicGrid& full = s.v.grid();
  const double sigma = 0.07;
  const auto gamma = smooth_phase(full, 0.1);
  const auto inv = inverse_modulated(s, sigma, gamma, wave());
  // u(x - sigma - gamma(x)) = phi + hat_w + hat_v at every node.
  const auto lhs = compose(s.u(), full, negated(gamma), -sigma, EvaluationMethod::Exact);
  const auto rhs = tile(wave().profile + inv.hat_w, full) + inv.hat_v;
  CHECK(norm(lhs - rhs, NormKind::Linf) <= 1e-9);
}

TEST_CASE("tracker keeps gamma at zero without localized data") {
  BlochOptions bo;
  bo.threads = 2;
  const auto report = verify_assumptions(wave(), 16, bo);
  auto split = std::make_shared<const CriticalModeSplit>(wave(), report, 4);
  ToothPerturbation tp;
  tp.coperiodic_seed = random_field(wave().grid(), 6, 1e-3);
  const auto d = make_tooth_data(wave(), tp, 4);
  ModulationOptions mo;
  mo.sample_dt = 0.1;
  mo.keep_every = 10;
  ModulationTracker tracker(wave(), zero_mode(), split, d, mo);
  EvolveOptions eo;
  eo.t_end = 4;
  eo.integrator.dt = 0.01;
  eo.snapshot_stride = 400;
  eo.sample_stride = 10;
  eo.observer = [&](const SimulationState& st) { tracker.push(st); };
  evolve(wave(), d, eo);
  const auto tr = tracker.finish();
  CHECK(tr.sigma.sigma.front() == 0.0);
  REQUIRE_FALSE(tr.gamma_fields.empty());
  for (const auto& [t, g] : tr.gamma_fields) CHECK(g.max_abs() <= 1e-15);
  for (const auto& smp : tr.samples) CHECK(smp.hat_v_l2 <= 1e-12);
}

TEST_CASE("nonlinear remainders") {
  const PeriodicGrid g(64, 2 * pi);
  const auto& b = wave().profile;
  const auto w = random_field(g, 1, 0.3), v = random_field(g, 2, 0.3);
  const RealPairField zero(g);
  CHECK(norm(r1(b, zero), NormKind::Linf) == 0.0);
  CHECK(norm(r21(b, w, zero), NormKind::Linf) <= 1e-15);
  CHECK(norm(r22(b, zero, v), NormKind::Linf) <= 1e-15);
  CHECK(norm(r2(b, w, v) - r21(b, w, v) - r22(b, w, v), NormKind::Linf) <= 1e-13);
  CHECK(norm(r1(b, v + w) - r1(b, w) - r2(b, w, v), NormKind::Linf) <= 1e-13);

  const double ratio = norm(r1(b, 1e-2 * w), NormKind::L2) / norm(r1(b, 0.5e-2 * w), NormKind::L2);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  const double linear = norm(r22(b, 1e-2 * w, v), NormKind::L2) / norm(r22(b, 0.5e-2 * w, v), NormKind::L2);
  CHECK(linear == doctest::Approx(2.0).epsilon(0.05));
  // ||R22(w, v)|| <= C ||w||_inf ||v|| with C bounded as both shrink.
  double c_max = 0, c_min = 1e300;
  for (double eps : {1.0, 0.1, 0.01}) {
    const auto ws = eps * w, vs = eps * v;
    const double c = norm(r22(b, ws, vs), NormKind::L2) / (norm(ws, NormKind::Linf) * norm(vs, NormKind::L2));
    c_max = std::max(c_max, c);
    c_min = std::min(c_min, c);
  }
  CHECK(c_max / c_min <= 2.0);
}

TEST_CASE("residual identities on manufactured fields") {
  SUBCASE("zero phase") {
    ManufactureSpec spec;
    spec.points_per_cell = 64;
    spec.zero_phase = true;
    const auto m = manufacture(wave(), spec);
    CHECK(residual_identity_inverse(m, wave()).residual_l2 <= 1e-10);
    CHECK(residual_identity_forward(m, wave()).residual_l2 <= 1e-10);
  }
  SUBCASE("fine grid and spectral convergence") {
    auto run = [](std::size_t ppc) {
      WaveParameters p = wave().params;
      const WaveProfile w = newton_wave(resample(wave().profile, ppc), p);
      ManufactureSpec spec;
      spec.points_per_cell = ppc;
      const auto m = manufacture(w, spec);
      return std::pair{residual_identity_inverse(m, w).residual_l2, residual_identity_forward(m, w).residual_l2};
    };
    const auto coarse = run(16), mid = run(24), fine = run(256);
    CHECK(fine.first <= 1e-8);
    CHECK(fine.second <= 1e-8);
    const auto finer = run(32);
    CHECK(mid.first < 0.1 * coarse.first);
    CHECK(finer.first < 0.1 * mid.first);
    CHECK(mid.second < 0.1 * coarse.second);
    CHECK(finer.second < 0.1 * mid.second);
  }
  SUBCASE("the cancelled term is really cancelled") {
    ManufactureSpec spec;
    spec.points_per_cell = 128;
    const WaveProfile w = newton_wave(resample(wave().profile, 128), wave().params);
    const auto m = manufacture(w, spec);
    IdentityOptions keep;
    keep.retain_sigma_t_w_term = true;
    const auto base = residual_identity_inverse(m, w);
    const auto with = residual_identity_inverse(m, w, keep);
    CHECK(with.retained_term_l2 > 1e-4);
    CHECK(std::abs(with.residual_l2 - with.retained_term_l2) <= 1e-6 + base.residual_l2);
  }
  SUBCASE("R5 two ways") {
    const PeriodicGrid full = wave().grid().with_cells(4);
    const auto gamma = smooth_phase(full, 0.2);
    const auto gamma_t = smooth_phase(full, -0.05);
    const auto a = r5_chain_rule(wave(), gamma, gamma_t), b = r5_direct(wave(), gamma, gamma_t);
    CHECK(norm(a - b, NormKind::Linf) <= 1e-10 * std::max(1.0, norm(a, NormKind::Linf)));
  }
}
