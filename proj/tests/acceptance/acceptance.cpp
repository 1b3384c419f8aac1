// Prints one PASS/FAIL line per acceptance criterion; exits 0 iff all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lab/config.hpp"
#include "lab/run_dir.hpp"
#include "lab/stages.hpp"
#include "lle/bloch.hpp"
#include "lle/dense_eigen.hpp"
#include "lle/diagnostics.hpp"
#include "lle/error.hpp"
#include "lle/evolution.hpp"
#include "lle/identities.hpp"
#include "lle/nonlinear_terms.hpp"
#include "lle/operators.hpp"
#include "lle/spectral.hpp"
#include "lle/waves.hpp"

namespace {

using namespace lle;
using lab::fs::path;
using lab::json;
constexpr double pi = std::numbers::pi;

// Pinned tolerances.
constexpr double kWaveResidual = 1e-10;
constexpr double kWaveSeconds = 10.0;
constexpr double kKernel = 1e-8;
constexpr double kSpectralSeconds = 120.0;
constexpr double kUnion = 1e-6;
constexpr double kIdentity = 1e-8;
constexpr double kSplit = 1e-8;
constexpr double kLinearTol = 0.30;
constexpr double kQuadLo = 3.6, kQuadHi = 4.4, kBilLo = 1.8, kBilHi = 2.2;
constexpr double kStructureTol = 0.30;
constexpr std::size_t kMinSamples = 100;
constexpr double kClosedForm = 1e-10;

const path scratch = LLE_ACCEPTANCE_DIR;
const path configs = LLE_CONFIG_DIR;
const unsigned threads = std::max(1u, std::thread::hardware_concurrency());

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WaveParameters default_params() {
  return lab::RunConfig{}.wave_parameters();
}

const WaveProfile& wave64() {
  static const WaveProfile w = construct_wave(default_params(), 64, {0.6, 0.3, 1.0});
  return w;
}

lab::RunContext context(const std::string& config, const std::string& name,
                        const std::vector<std::string>& overrides = {}) {
  lab::RunContext ctx;
  ctx.config = lab::load_config(configs / config);
  for (const auto& o : overrides) lab::apply_override(ctx.config, o);
  lab::validate(ctx.config);
  ctx.root = scratch / name;
  ctx.threads = threads;
  lab::fs::remove_all(ctx.root);
  return ctx;
}

json check(const json& verdict, const std::string& name) {
  for (const auto& c : verdict.at("checks"))
    if (c.at("name") == name) return c;
  return json{{"name", name}, {"status", "missing"}};
}

Outcome steady_wave() {
  const auto t0 = std::chrono::steady_clock::now();
  const WaveProfile w = construct_wave(default_params(), 256, {0.6, 0.3, 1.0});
  const double s = seconds_since(t0);
  const double shifted = norm(stationary_residual(translate(w.profile, 0.37 * w.params.period), w.params), NormKind::L2);
  return {w.residual_norm <= kWaveResidual && shifted <= kWaveResidual && s < kWaveSeconds,
          fmt("residual %.2e, translated %.2e, %.2f s", w.residual_norm, shifted, s)};
}

Outcome spectral_assumptions() {
  const WaveProfile w = construct_wave(default_params(), 256, {0.6, 0.3, 1.0});
  BlochOptions o;
  o.threads = threads;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = verify_assumptions(w, 64, o);
  const double s = seconds_since(t0);
  const double kernel = (assemble_bloch(w, 0.0).matrix * to_fourier_vector(w.derivative)).norm() /
                        to_fourier_vector(w.derivative).norm();
  const bool ok = r.d1_ok && r.d2_ok && r.d3_ok && r.theta_fit > 0 && kernel <= kKernel && s < kSpectralSeconds;
  return {ok, fmt("d1 %d d2 %d d3 %d, theta %.3g, kernel %.2e, gap %.4f, %.1f s", r.d1_ok, r.d2_ok, r.d3_ok,
                  r.theta_fit, kernel, r.gap_delta0, s)};
}

Outcome union_property() {
  const auto u = check_union_property(wave64(), 8);
  return {u.matched > 0 && u.max_mismatch <= kUnion, fmt("mismatch %.2e over %zu eigenvalues", u.max_mismatch, u.matched)};
}

Outcome identities() {
  std::vector<double> inv, fwd;
  for (std::size_t ppc : {16, 32, 256}) {
    const WaveProfile w = newton_wave(resample(wave64().profile, ppc), wave64().params);
    ManufactureSpec spec;
    spec.points_per_cell = ppc;
    const auto m = manufacture(w, spec);
    inv.push_back(residual_identity_inverse(m, w).residual_l2);
    fwd.push_back(residual_identity_forward(m, w).residual_l2);
  }
  const bool converging = inv[1] < inv[0] && fwd[1] < fwd[0];
  const bool ok = inv.back() <= kIdentity && fwd.back() <= kIdentity && converging;
  return {ok, fmt("N=1024 inverse %.2e forward %.2e; N=64 %.2e/%.2e, N=128 %.2e/%.2e", inv[2], fwd[2], inv[0],
                  fwd[0], inv[1], fwd[1])};
}

Outcome split_consistency() {
  const WaveProfile& w = wave64();
  ToothPerturbation tp;
  tp.coperiodic_seed = random_coperiodic(w.grid(), 0.02, 6, 9);
  tp.knocked_out_cells = {3};
  tp.smoothing_width = 0.5;
  tp.depth = 0.2;
  const std::size_t m = 8;
  const auto d = make_tooth_data(w, tp, m);
  const double dt = 0.01;
  CoupledIntegrator split(w.params, initial_state(w, d, dt), {dt});
  FullFieldIntegrator direct(w.params, tile(w.profile + d.w0, w.grid().with_cells(m)) + d.v0, 0.0, {dt});
  double worst = 0;
  for (int k = 1; k <= 100; ++k) {
    split.advance_to(0.1 * k);
    direct.advance_to(0.1 * k);
    worst = std::max(worst, norm(split.state().u() - direct.u(), NormKind::Linf));
  }
  return {worst <= kSplit, fmt("max |u_split - u_direct| %.2e up to t = 10", worst)};
}

Outcome coperiodic_decay() {
  const auto ctx = context("coperiodic.ini", "coperiodic");
  lab::run_pipeline(ctx);
  const json v = lab::read_json(ctx.root / "reports" / "verdict.json");
  const json a = check(v, "coperiodic_rate_hat_w_h1"), b = check(v, "coperiodic_rate_sigma_dot");
  const double delta0 = lab::read_json(ctx.root / "reports" / "bloch.json").at("gap_delta0");
  const auto rate = [](const json& c) { return c.contains("value") && c["value"].is_object() ? c["value"].value("rate", NAN) : NAN; };
  const bool ok = a.at("status") == "pass" && b.at("status") == "pass";
  return {ok, fmt("delta0 %.4f, hat_w H1 rate %.4f, sigma_t rate %.4f (tolerance 15%%)", delta0, rate(a), rate(b))};
}

Outcome localized_decay() {
  const auto ctx = context("default.ini", "default");
  lab::run_pipeline(ctx);
  const json v = lab::read_json(ctx.root / "reports" / "verdict.json");
  const json a = check(v, "decay_hat_v_l2"), b = check(v, "decay_ring_v_linf");
  auto describe = [](const json& c) {
    if (c.at("status") != "pass" && c.at("status") != "fail") return std::string(c.at("status"));
    return fmt("%.3f (R^2 %.3f, t in [%.1f, %.1f])", c["value"]["exponent"].get<double>(),
               c["value"]["r_squared"].get<double>(), c["value"]["t1"].get<double>(), c["value"]["t2"].get<double>());
  };
  const bool ok = a.at("status") == "pass" && b.at("status") == "pass";
  return {ok, "hat_v L2 " + describe(a) + ", ring_v Linf " + describe(b)};
}

// Tooth runs at M = 32 with the default data scaled by 1, 1/2 and 1/4.
struct ScaledRun {
  double scale;
  json modulation;
};

const std::vector<ScaledRun>& scaled_runs() {
  static const std::vector<ScaledRun> runs = [] {
    std::vector<ScaledRun> out;
    const lab::RunConfig base = lab::load_config(configs / "default.ini");
    for (double s : {1.0, 0.5, 0.25}) {
      const auto ctx = context("default.ini", fmt("scaled_%g", s),
                               {"tooth.cells=32", "tooth.knockout=16", "integrator.t_end=60",
                                fmt("tooth.depth=%.17g", base.tooth.depth * s),
                                fmt("tooth.bump_amplitude=%.17g", base.tooth.bump_amplitude * s)});
      lab::RunManifest manifest = lab::open_run(ctx);
      lab::stage_solve_wave(ctx, manifest);
      lab::stage_bloch(ctx, manifest);
      lab::stage_evolve(ctx, manifest);
      lab::stage_extract(ctx, manifest);
      out.push_back({s, lab::read_json(ctx.root / "reports" / "modulation.json")});
    }
    return out;
  }();
  return runs;
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

Outcome stability_bound() {
  std::vector<double> ratio;
  std::string detail;
  for (const auto& r : scaled_runs()) {
    const double e0 = r.modulation.at("e_l").get<double>() + r.modulation.at("e_p").get<double>();
    ratio.push_back(r.modulation.at("sup_u_minus_phi").get<double>() / e0);
    detail += fmt("E0 %.3e: %.4f; ", e0, ratio.back());
  }
  const double s = spread(ratio);
  return {std::isfinite(s) && s <= kLinearTol, detail + fmt("spread %.1f%%", 100 * s)};
}

Outcome nonlinear_scaling() {
  const WaveProfile& w = wave64();
  std::mt19937_64 seeds(2024);
  double qlo = 1e300, qhi = 0, blo = 1e300, bhi = 0;
  for (int k = 0; k < 100; ++k) {
    const auto a = random_coperiodic(w.grid(), 1e-2, 8, seeds()), b = random_coperiodic(w.grid(), 1e-2, 8, seeds());
    const double q1 = norm(r1(w.profile, a), NormKind::L2) / norm(r1(w.profile, 0.5 * a), NormKind::L2);
    const double q2 = norm(r21(w.profile, a, b), NormKind::L2) / norm(r21(w.profile, a, 0.5 * b), NormKind::L2);
    const double bl = norm(r22(w.profile, a, b), NormKind::L2) / norm(r22(w.profile, 0.5 * a, b), NormKind::L2);
    qlo = std::min({qlo, q1, q2});
    qhi = std::max({qhi, q1, q2});
    blo = std::min(blo, bl);
    bhi = std::max(bhi, bl);
  }
  const bool ok = qlo >= kQuadLo && qhi <= kQuadHi && blo >= kBilLo && bhi <= kBilHi;
  return {ok, fmt("quadratic ratios [%.4f, %.4f], bilinear ratios [%.4f, %.4f]", qlo, qhi, blo, bhi)};
}

Outcome structure_constants() {
  const auto& runs = scaled_runs();
  const json& a = runs[0].modulation;
  const json& b = runs[1].modulation;
  std::string detail;
  bool ok = true;
  auto compare = [&](const char* name, double x, double y) {
    const double s = std::isfinite(x) && std::isfinite(y) && x > 0 && y > 0 ? std::max(x / y, y / x) - 1 : INFINITY;
    ok = ok && s <= kStructureTol;
    detail += fmt("%s %.4g/%.4g; ", name, x, y);
  };
  const std::size_t n = std::min({a["damping"]["checked"].get<std::size_t>(), b["damping"]["checked"].get<std::size_t>(),
                                  a["relate"]["checked"].get<std::size_t>(), b["relate"]["checked"].get<std::size_t>()});
  ok = n >= kMinSamples;
  compare("c_damping", a["damping"]["c_damping"], b["damping"]["c_damping"]);
  compare("c_interpolation", a["damping"]["c_interpolation"], b["damping"]["c_interpolation"]);
  for (const char* k : {"c_l2", "c_h3", "c_linf"}) compare(k, a["relate"][k], b["relate"][k]);
  return {ok, detail + fmt("E0 and E0/2, %zu valid samples", n)};
}

Outcome calibration() {
  std::vector<double> t, y1, y2, y3;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0, 0.02);
  for (int i = 0; i < 400; ++i) {
    t.push_back(0.5 * i);
    y1.push_back(3.0 * std::pow(1 + t.back(), -0.75));
    y3.push_back(std::pow(1 + t.back(), -0.5) * std::exp(noise(rng)));
  }
  std::vector<double> te;
  for (int i = 0; i < 200; ++i) {
    te.push_back(0.2 * i);
    y2.push_back(0.2 * std::exp(-0.3 * te.back()));
  }
  const double k1 = fit_decay(t, y1, DecayModel::Algebraic).rate;
  const double k2 = fit_decay(te, y2, DecayModel::Exponential).rate;
  const double k3 = fit_decay(t, y3, DecayModel::Algebraic).rate;
  bool ok = std::abs(k1 - 0.75) <= 0.005 && std::abs(k2 - 0.3) <= 0.003 && k3 >= 0.45 && k3 <= 0.55;

  WaveParameters p = default_params();
  p.forcing = 0;
  const auto w = WaveProfile::from_samples(p, RealPairField(PeriodicGrid(64, p.period)));
  double err = 0;
  for (double xi : {0.0, 0.1, -0.37, 0.5}) {
    const auto mat = assemble_bloch(w, xi);
    const auto dec = eigen_decompose(mat.matrix, false);
    std::vector<cd> exact;
    for (std::size_t a = 0; a < 64; ++a) {
      const double q = xi + 2 * pi * static_cast<double>(mat.first_label + static_cast<long>(a)) / p.period;
      exact.push_back(cd(-1, p.beta * q * q - p.alpha));
      exact.push_back(cd(-1, -(p.beta * q * q - p.alpha)));
    }
    for (Eigen::Index i = 0; i < dec.values.size(); ++i) {
      double best = 1e300;
      for (const cd& z : exact) best = std::min(best, std::abs(dec.values(i) - z));
      err = std::max(err, best);
    }
  }
  ok = ok && err <= kClosedForm;
  return {ok, fmt("kappa %.4f (0.75), delta %.4f (0.3), noisy kappa %.4f; zero-profile spectrum error %.2e", k1, k2,
                  k3, err)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"steady wave", steady_wave},
      {"spectral assumptions", spectral_assumptions},
      {"Bloch union property", union_property},
      {"residual identities", identities},
      {"split consistency", split_consistency},
      {"co-periodic decay", coperiodic_decay},
      {"localized decay", localized_decay},
      {"stability bound", stability_bound},
      {"nonlinear scaling", nonlinear_scaling},
      {"damping and relate structure", structure_constants},
      {"calibration", calibration},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
