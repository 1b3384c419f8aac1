#include <doctest.h>

#include <cmath>
#include <numbers>

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
}  // namespace

TEST_CASE("tooth data") {
  const std::size_t m = 8;
  const PeriodicGrid full = wave().grid().with_cells(m);
  SUBCASE("no knockout gives zero localized data") {
    const auto d = make_tooth_data(wave(), {}, m);
    CHECK(norm(d.v0, NormKind::Linf) == 0.0);
    CHECK(norm(d.w0, NormKind::Linf) == 0.0);
  }
  SUBCASE("full knockout switches the signal off at the cell center") {
    ToothPerturbation tp;
    tp.knocked_out_cells = {m / 2};
    tp.smoothing_width = wave().params.period / 16;
    const auto d = make_tooth_data(wave(), tp, m);
    const auto u = tile(wave().profile + d.w0, full) + d.v0;
    const std::size_t center = (m / 2) * full.points_per_cell() + full.points_per_cell() / 2;
    CHECK(std::abs(u[center]) <= 1e-10);
    // Support stays in the knocked-out cell up to erf tails.
    for (std::size_t i = 0; i < full.num_points(); ++i)
      if (i / full.points_per_cell() < m / 2 - 1 || i / full.points_per_cell() > m / 2 + 1)
        CHECK(std::abs(d.v0[i]) <= 1e-12);
  }
  SUBCASE("two adjacent cells give one contiguous block") {
    ToothPerturbation tp;
    tp.knocked_out_cells = {3, 4};
    tp.smoothing_width = 0.2;
    const auto d = make_tooth_data(wave(), tp, m);
    const auto chi = cell_indicator(full, tp.knocked_out_cells, tp.smoothing_width);
    std::size_t first = full.num_points(), last = 0, count = 0;
    for (std::size_t i = 0; i < chi.size(); ++i)
      if (chi[i] > 0.5) {
        first = std::min(first, i);
        last = std::max(last, i);
        ++count;
      }
    CHECK(count == last - first + 1);
    CHECK(static_cast<double>(count) * full.spacing() == doctest::Approx(2 * wave().params.period).epsilon(0.05));
    CHECK(norm(d.v0, NormKind::Linf) > 0.5);
  }
}

TEST_CASE("random co-periodic data is seeded and normalized") {
  const auto a = random_coperiodic(wave().grid(), 1e-3, 8, 7), b = random_coperiodic(wave().grid(), 1e-3, 8, 7);
  const auto c = random_coperiodic(wave().grid(), 1e-3, 8, 8);
  CHECK(norm(a - b, NormKind::Linf) == 0.0);
  CHECK(norm(a - c, NormKind::Linf) > 0.0);
  CHECK(norm(a, NormKind::L2) == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("the wave is preserved without perturbation") {
  const auto d = make_tooth_data(wave(), {}, 2);
  EvolveOptions o;
  o.t_end = 10;
  o.snapshot_stride = 500;
  o.integrator.dt = 0.01;
  const auto traj = evolve(wave(), d, o);
  for (const auto& s : traj.snapshots) {
    CHECK(norm(s.w - wave().profile, NormKind::Linf) <= 1e-10);
    CHECK(norm(s.v, NormKind::Linf) <= 1e-10);
  }
}

TEST_CASE("ETDRK4 order") {
  ToothPerturbation tp;
  tp.coperiodic_seed = random_coperiodic(wave().grid(), 0.05, 6, 2);
  tp.knocked_out_cells = {1};
  tp.smoothing_width = 0.5;
  tp.depth = 0.3;
  const auto d = make_tooth_data(wave(), tp, 2);
  SUBCASE("step doubling") {
    auto difference = [&](double dt) {
      auto s0 = initial_state(wave(), d, dt);
      const auto coarse = step(s0, wave());
      s0.dt = dt / 2;
      const auto fine = step(step(s0, wave()), wave());
      return norm(coarse.u() - fine.u(), NormKind::Linf);
    };
    const double ratio = difference(0.1) / difference(0.05);
    CHECK(ratio >= 12);
    CHECK(ratio <= 20);
  }
  SUBCASE("global error slope") {
    auto solve = [&](double dt) {
      CoupledIntegrator run(wave().params, initial_state(wave(), d, dt), {dt});
      run.advance_to(2.0);
      return run.state().u();
    };
    const auto ref = solve(0.05 / 64);
    std::vector<double> x, y;
    for (double dt : {0.05, 0.025, 0.0125}) {
      x.push_back(std::log(dt));
      y.push_back(std::log(norm(solve(dt) - ref, NormKind::Linf)));
    }
    const double slope = (y[2] - y[0]) / (x[2] - x[0]);
    CHECK(std::abs(slope - 4) <= 0.3);
  }
}

TEST_CASE("mode growth on a constant state matches the dispersion relation") {
  WaveParameters p;
  p.period = 2 * pi;
  p.forcing = 1.1;
  const auto s = homogeneous_states(p).back();
  const PeriodicGrid cell(32, p.period);
  const auto w = WaveProfile::from_samples(p, RealPairField::sample(cell, [&](double) { return s.value; }));
  const std::size_t m = 4;
  const PeriodicGrid full = cell.with_cells(m);
  // Mode q = 2 pi * 3 / L; after the decaying branch dies out the norm grows at the larger root.
  const double q = 2 * pi * 3 / full.length();
  const double rho = s.rho;
  const double dd = p.beta * q * q - p.alpha + 2 * rho;
  REQUIRE(rho * rho > dd * dd);
  const double lambda = -1.0 + std::sqrt(rho * rho - dd * dd);
  ToothData d;
  d.w0 = RealPairField(cell);
  d.v0 = RealPairField::sample(full, [&](double x) {
    return 1e-7 * std::exp(cd(0, q * x)) + cd(0, 0.7e-7) * std::exp(cd(0, -q * x));
  });
  CoupledIntegrator run(p, initial_state(w, d, 0.005), {0.005});
  run.advance_to(8.0);
  const double n0 = norm(run.v(), NormKind::L2);
  run.advance_to(10.0);
  const double n1 = norm(run.v(), NormKind::L2);
  const double measured = std::log(n1 / n0) / 2.0;
  CHECK(std::abs(measured - lambda) <= 1e-4 * std::max(1.0, std::abs(lambda)));
}

TEST_CASE("coupled split evolution matches the full field") {
  ToothPerturbation tp;
  tp.coperiodic_seed = random_coperiodic(wave().grid(), 0.02, 6, 9);
  tp.knocked_out_cells = {3};
  tp.smoothing_width = 0.5;
  tp.depth = 0.2;
  const std::size_t m = 8;
  const auto d = make_tooth_data(wave(), tp, m);
  const double dt = 0.01;
  CoupledIntegrator split(wave().params, initial_state(wave(), d, dt), {dt});
  const PeriodicGrid full = wave().grid().with_cells(m);
  FullFieldIntegrator direct(wave().params, tile(wave().profile + d.w0, full) + d.v0, 0.0, {dt});
  double worst = 0;
  for (double t = 1; t <= 10 + 1e-9; t += 1) {
    split.advance_to(t);
    direct.advance_to(t);
    worst = std::max(worst, norm(split.state().u() - direct.u(), NormKind::Linf));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("boundary monitor") {
  const PeriodicGrid full = wave().grid().with_cells(10);
  const auto v = RealPairField::sample(full, [&](double x) { return x < full.cell_period() ? 1.0 : 0.0; });
  CHECK(boundary_level(v, 0.1) == 1.0);
  const auto centered = RealPairField::sample(full, [&](double x) {
    return std::abs(x - full.length() / 2) < full.cell_period() ? 1.0 : 0.0;
  });
  CHECK(boundary_level(centered, 0.1) == 0.0);
}
