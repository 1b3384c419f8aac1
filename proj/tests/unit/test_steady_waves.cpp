#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lle/error.hpp"
#include "lle/operators.hpp"
#include "lle/spectral.hpp"
#include "lle/waves.hpp"

using namespace lle;
namespace {
constexpr double pi = std::numbers::pi;

WaveParameters defaults() {
  WaveParameters p;
  p.period = 2 * pi;
  return p;
}

const WaveProfile& default_wave() {
  static const WaveProfile w = construct_wave(defaults(), 128, {0.6, 0.3, 1.0});
  return w;
}

bool has_root(const std::vector<ConstantState>& s, double rho) {
  for (const auto& c : s)
    if (std::abs(c.rho - rho) <= 1e-12) return true;
  return false;
}
}  // namespace

TEST_CASE("parameters are validated") {
  WaveParameters p = defaults();
  p.beta = 2;
  CHECK_THROWS_AS(p.validate(), Error);
  p = defaults();
  p.forcing = -1;
  CHECK_THROWS_AS(p.validate(), Error);
  p = defaults();
  p.forcing = 0;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("homogeneous states") {
  WaveParameters p = defaults();
  p.forcing = 0;
  const auto zero = homogeneous_states(p);
  REQUIRE(zero.size() == 1);
  CHECK(std::abs(zero[0].value) == 0.0);

  p.alpha = 0;
  p.forcing = std::sqrt(2.0);
  CHECK(has_root(homogeneous_states(p), 1.0));
  p.alpha = 2;
  CHECK(has_root(homogeneous_states(p), 2.0));

  p = defaults();
  p.alpha = 3;
  p.forcing = 2.0;
  const auto states = homogeneous_states(p);
  CHECK(states.size() == 3);
  for (const auto& s : states) {
    const double cubic = s.rho * (1 + (p.alpha - s.rho) * (p.alpha - s.rho)) - p.forcing * p.forcing;
    CHECK(std::abs(cubic) <= 1e-12 * p.forcing * p.forcing);
    const PeriodicGrid g(16, p.period);
    const auto u = RealPairField::sample(g, [&](double) { return s.value; });
    CHECK(norm(stationary_residual(u, p), NormKind::Linf) <= 1e-12);
  }
}

TEST_CASE("Newton keeps an exact constant state") {
  const WaveParameters p = defaults();
  const auto s = homogeneous_states(p).back();
  const PeriodicGrid g(64, p.period);
  const auto guess = RealPairField::sample(g, [&](double) { return s.value; });
  const WaveProfile w = newton_wave(guess, p);
  CHECK(norm(w.profile - guess, NormKind::Linf) <= 1e-12);
  CHECK_FALSE(w.is_nonconstant());
}

TEST_CASE("Newton from a Turing seed converges to a nonconstant wave") {
  const WaveProfile& w = default_wave();
  CHECK(w.residual_norm <= 1e-10);
  CHECK(w.is_nonconstant());
  CHECK(norm(w.derivative, NormKind::Linf) > 0.1);
}

TEST_CASE("translated wave solves the same equation") {
  const WaveProfile& w = default_wave();
  for (double s : {0.1, 1.3, 4.0})
    CHECK(norm(stationary_residual(translate(w.profile, s), w.params), NormKind::L2) <= 1e-10);
}

TEST_CASE("refined grid re-converges in a few iterations") {
  const WaveProfile& w = default_wave();
  const WaveProfile fine = newton_wave(resample(w.profile, 256), w.params);
  CHECK(fine.newton.iterations <= 3);
  CHECK(norm(resample(fine.profile, 128) - w.profile, NormKind::Linf) <= 1e-8);
  CHECK(fine.residual_norm <= 1e-10);
}

TEST_CASE("continuation") {
  const WaveProfile& w = default_wave();
  SUBCASE("to the same forcing returns the start") {
    const WaveProfile same = continuation(w, w.params.forcing, 1);
    CHECK(norm(same.profile - w.profile, NormKind::Linf) <= 1e-12);
  }
  SUBCASE("step halving") {
    const WaveProfile a = continuation(w, 1.15, 10), b = continuation(w, 1.15, 20);
    CHECK(a.residual_norm <= 1e-10);
    CHECK(norm(a.profile - b.profile, NormKind::Linf) <= 1e-7);
  }
  SUBCASE("a fold is reported") {
    try {
      continuation(w, 0.9, 40);
      FAIL("continuation through the fold should fail");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingularJacobian);
    }
  }
}

TEST_CASE("no wave below the instability threshold") {
  WaveParameters p = defaults();
  p.forcing = 0.5;
  CHECK_THROWS_AS(construct_wave(p, 64, {0.6, 0.3}), Error);
}
