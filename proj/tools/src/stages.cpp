#include "lab/stages.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <memory>
#include <numbers>

#include "lab/svg.hpp"
#include "lle/diagnostics.hpp"
#include "lle/error.hpp"
#include "lle/evolution.hpp"
#include "lle/field_io.hpp"
#include "lle/identities.hpp"
#include "lle/modulation.hpp"
#include "lle/operators.hpp"
#include "lle/spectral.hpp"

namespace lab {
namespace {

using lle::cd;

void log(const std::string& message) { std::cerr << "lle-lab: " << message << "\n"; }

json complex_json(cd z) { return json::array({z.real(), z.imag()}); }

std::string indexed(const std::string& prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", k);
  return prefix + buf + ".bin";
}

std::size_t steps_for(double interval, double dt) {
  return static_cast<std::size_t>(std::llround(interval / dt));
}

bool is_constant(const RunConfig& c) { return c.wave.kind == "constant"; }
bool has_localized(const RunConfig& c) {
  return (!c.tooth.knockout.empty() && c.tooth.depth != 0.0) || c.tooth.bump_amplitude != 0.0;
}
bool has_coperiodic(const RunConfig& c) { return c.tooth.coperiodic_l2 > 0.0; }

template <class Body>
void run_stage(const RunContext& ctx, RunManifest& manifest, const std::string& name, Body&& body) {
  if (ctx.resume && manifest.stage_complete(name)) {
    log(name + ": up to date, skipped");
    return;
  }
  log(name + ": running");
  const auto start = std::chrono::steady_clock::now();
  StageRecord rec;
  rec.name = name;
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  try {
    rec.outputs = body();
    rec.status = "done";
  } catch (const std::exception& e) {
    rec.status = "failed";
    rec.error = e.what();
    rec.seconds = elapsed();
    manifest.record(rec);
    throw;
  }
  rec.seconds = elapsed();
  manifest.record(rec);
  log(name + ": done in " + std::to_string(rec.seconds) + " s");
}

lle::BlochOptions bloch_options(const RunContext& ctx) {
  lle::BlochOptions o;
  o.kernel_tol = ctx.config.bloch.kernel_tol;
  o.spec_tol = ctx.config.bloch.spec_tol;
  o.fit_tol_factor = ctx.config.bloch.fit_tol_factor;
  o.threads = std::max(1u, ctx.threads);
  return o;
}

lle::ToothData make_data(const RunConfig& c, const lle::WaveProfile& wave) {
  const lle::PeriodicGrid full = wave.grid().with_cells(c.tooth.cells);
  lle::ToothPerturbation tp;
  tp.knocked_out_cells = c.tooth.knockout;
  tp.smoothing_width = c.tooth.smoothing_width;
  tp.depth = c.tooth.depth;
  if (has_coperiodic(c))
    tp.coperiodic_seed =
        lle::random_coperiodic(wave.grid(), c.tooth.coperiodic_l2, c.tooth.coperiodic_modes, c.run.seed);
  if (c.tooth.bump_amplitude != 0.0)
    tp.extra_localized = lle::localized_phase_bump(wave, full, c.tooth.bump_amplitude, 0.5 * full.length(),
                                                   c.tooth.bump_width_periods * c.wave.period);
  return lle::make_tooth_data(wave, tp, c.tooth.cells);
}

lle::EvolveOptions evolve_options(const RunConfig& c) {
  lle::EvolveOptions o;
  o.t_end = c.integrator.t_end;
  o.snapshot_stride = steps_for(c.integrator.snapshot_every, c.integrator.dt);
  o.boundary_tol = c.integrator.boundary_tol;
  o.boundary_fraction = c.integrator.boundary_fraction;
  o.integrator.dt = c.integrator.dt;
  o.integrator.dealias = c.integrator.dealias;
  return o;
}

double relative(const lle::IdentityResult& r, double field_l2) {
  return r.residual_l2 / std::max(field_l2, std::numeric_limits<double>::min());
}

json identity_json(const lle::IdentityResult& r, double field_l2) {
  return {{"residual_l2", r.residual_l2}, {"lhs_l2", r.lhs_l2}, {"rhs_l2", r.rhs_l2},
          {"defect_l2", r.defect_l2}, {"field_l2", field_l2}, {"relative_to_field", relative(r, field_l2)}};
}

// Closed-form max real part over the labels of one Bloch fiber for a constant state.
double constant_state_max_real(const lle::WaveParameters& p, double rho, double xi, std::size_t n) {
  const long first = lle::first_label(xi, n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    const double k = xi + 2.0 * std::numbers::pi * static_cast<double>(first + static_cast<long>(a)) / p.period;
    const double d = p.beta * k * k - p.alpha + 2.0 * rho;
    const cd root = std::sqrt(cd(rho * rho - d * d, 0.0));
    best = std::max(best, -1.0 + root.real());
  }
  return best;
}

std::vector<std::string> sample_columns() {
  std::vector<std::string> cols{"t", "boundary_warning", "gamma_valid"};
  for (const auto& n : lle::series_names()) cols.push_back(n);
  return cols;
}

}  // namespace

RunManifest open_run(const RunContext& ctx) {
  validate(ctx.config);
  fs::create_directories(ctx.root);
  for (const char* d : {"snapshots", "tracks", "reports", "plots", "wave"}) fs::create_directories(ctx.root / d);
  const std::string text = serialize(ctx.config);
  RunManifest m = RunManifest::load_or_create(ctx.root, sha256_text(text));
  if (!fs::exists(ctx.root / "config.ini") || read_text(ctx.root / "config.ini") != text)
    write_text(ctx.root / "config.ini", text);
  m.save();
  return m;
}

RunConfig load_run_config(const fs::path& root) {
  const fs::path p = root / "config.ini";
  if (!fs::exists(p)) lle::fail(lle::ErrorCode::Io, "no run configuration at " + p.string());
  return load_config(p);
}

lle::WaveProfile load_wave(const fs::path& root) {
  const json meta = read_json(root / "wave" / "wave.json");
  lle::WaveParameters p;
  p.alpha = meta.at("alpha");
  p.beta = meta.at("beta");
  p.forcing = meta.at("forcing");
  p.period = meta.at("period");
  const lle::FieldSnapshot snap = lle::read_field(root / "wave" / "profile.bin");
  return lle::WaveProfile::from_samples(p, snap.field);
}

std::vector<DefaultFit> default_fits(const RunConfig& c) {
  std::vector<DefaultFit> out;
  if (is_constant(c)) return out;
  if (has_localized(c))
    for (const char* n : {"hat_v_l2", "ring_v_linf", "gamma_x_linf", "gamma_linf"})
      out.push_back({n, lle::DecayModel::Algebraic});
  if (has_coperiodic(c))
    for (const char* n : {"hat_w_h1", "sigma_dot"}) out.push_back({n, lle::DecayModel::Exponential});
  return out;
}

void stage_solve_wave(const RunContext& ctx, RunManifest& manifest) {
  run_stage(ctx, manifest, "solve-wave", [&] {
    const RunConfig& c = ctx.config;
    const lle::WaveParameters p = c.wave_parameters();
    lle::WaveProfile wave;
    json meta;
    if (is_constant(c)) {
      const auto states = lle::homogeneous_states(p);
      if (states.empty()) lle::fail(lle::ErrorCode::NoConvergence, "no homogeneous state for these parameters");
      const auto top = std::max_element(states.begin(), states.end(),
                                        [](const auto& a, const auto& b) { return a.rho < b.rho; });
      const lle::PeriodicGrid cell(c.wave.points, p.period);
      wave = lle::WaveProfile::from_samples(p, lle::RealPairField::sample(cell, [&](double) { return top->value; }));
      meta["rho"] = top->rho;
      meta["state"] = complex_json(top->value);
    } else {
      wave = lle::construct_wave(p, c.wave.points, c.wave.seed_amplitudes);
      meta["newton_iterations"] = wave.newton.iterations;
      meta["newton_rcond"] = wave.newton.rcond;
      meta["phase_multiplier"] = wave.newton.phase_multiplier;
    }
    meta["kind"] = c.wave.kind;
    meta["alpha"] = p.alpha;
    meta["beta"] = p.beta;
    meta["forcing"] = p.forcing;
    meta["period"] = p.period;
    meta["points"] = c.wave.points;
    meta["residual_l2"] = wave.residual_norm;
    meta["nonconstant"] = wave.is_nonconstant();
    meta["translated_residual_l2"] =
        lle::norm(lle::stationary_residual(lle::translate(wave.profile, 0.37 * p.period), p), lle::NormKind::L2);
    meta["sup"] = lle::norm(wave.profile, lle::NormKind::Linf);

    lle::write_field(ctx.root / "wave" / "profile.bin", wave.profile, 0.0);
    write_json(ctx.root / "wave" / "wave.json", meta);
    Series re{"u_r", {}, {}}, im{"u_i", {}, {}, true};
    for (std::size_t i = 0; i < wave.profile.size(); ++i) {
      re.x.push_back(wave.grid().x(i));
      im.x.push_back(wave.grid().x(i));
      re.y.push_back(wave.profile[i].real());
      im.y.push_back(wave.profile[i].imag());
    }
    write_svg_plot(ctx.root / "plots" / "wave_profile.svg", {"steady wave", "x", "u"}, {re, im});
    return std::vector<std::string>{"wave/profile.bin", "wave/wave.json", "plots/wave_profile.svg"};
  });
}

void stage_bloch(const RunContext& ctx, RunManifest& manifest) {
  run_stage(ctx, manifest, "bloch-spectrum", [&] {
    const lle::WaveProfile wave = load_wave(ctx.root);
    const auto rep = lle::verify_assumptions(wave, ctx.config.bloch.xi_count, bloch_options(ctx));
    json j;
    j["d1"] = rep.d1_ok;
    j["d2"] = rep.d2_ok;
    j["d3"] = rep.d3_ok;
    j["assumptions_hold"] = rep.assumptions_hold();
    j["theta_fit"] = rep.theta_fit;
    j["theta_least_squares"] = rep.theta_least_squares;
    j["theta_global"] = rep.theta_global;
    j["gap_delta0"] = rep.gap_delta0;
    j["d2_slack"] = rep.d2_slack;
    j["cutoff_xi0"] = rep.cutoff_xi0;
    j["kernel_residual"] = rep.kernel_residual;
    j["zero_eigenvalue"] = complex_json(rep.zero_eigenvalue);
    j["near_zero_count"] = rep.near_zero_count;
    j["projector_overlap"] = rep.projector_overlap;
    j["curve_slope_at_zero"] = complex_json(rep.curve_slope_at_zero);
    j["kernel_tol"] = rep.kernel_tol;
    j["spec_tol"] = rep.spec_tol;
    j["fit_tol"] = rep.fit_tol;
    j["notes"] = rep.notes;
    if (rep.d1_witness) {
      j["d1_witness"] = complex_json(*rep.d1_witness);
      j["d1_witness_xi"] = rep.d1_witness_xi;
    }
    json curve = json::array();
    for (const auto& s : rep.critical_curve) curve.push_back({s.xi, s.lambda.real(), s.lambda.imag()});
    j["critical_curve"] = curve;

    Table spectrum{{"xi", "index", "re", "im"}, {}};
    Series top{"max Re lambda", {}, {}}, closed{"closed form", {}, {}, true};
    double closed_error = 0.0;
    const bool constant = !wave.is_nonconstant();
    double rho = 0.0;
    for (std::size_t i = 0; i < wave.profile.size(); ++i) rho += std::norm(wave.profile[i]);
    rho /= static_cast<double>(wave.profile.size());
    for (std::size_t m = 0; m < rep.xi_grid.size(); ++m) {
      const auto& vals = rep.eigenvalues[m];
      for (std::size_t k = 0; k < vals.size(); ++k)
        spectrum.rows.push_back({rep.xi_grid[m], static_cast<double>(k), vals[k].real(), vals[k].imag()});
      top.x.push_back(rep.xi_grid[m]);
      top.y.push_back(vals.front().real());
      if (constant) {
        const double exact = constant_state_max_real(wave.params, rho, rep.xi_grid[m], wave.profile.size());
        closed.x.push_back(rep.xi_grid[m]);
        closed.y.push_back(exact);
        closed_error = std::max(closed_error, std::abs(exact - vals.front().real()));
      }
    }
    if (constant) j["closed_form_max_error"] = closed_error;
    write_json(ctx.root / "reports" / "bloch.json", j);
    spectrum.write(ctx.root / "tracks" / "bloch_spectrum.csv");
    std::vector<Series> plot{top};
    if (constant) plot.push_back(closed);
    write_svg_plot(ctx.root / "plots" / "bloch_spectrum.svg", {"Bloch spectrum", "xi", "max Re lambda"}, plot);
    return std::vector<std::string>{"reports/bloch.json", "tracks/bloch_spectrum.csv", "plots/bloch_spectrum.svg"};
  });
}

void stage_evolve(const RunContext& ctx, RunManifest& manifest) {
  run_stage(ctx, manifest, "evolve", [&] {
    const RunConfig& c = ctx.config;
    const lle::WaveProfile wave = load_wave(ctx.root);
    const lle::ToothData data = make_data(c, wave);
    const lle::Trajectory traj = lle::evolve(wave, data, evolve_options(c));

    std::vector<std::string> outputs;
    Table track{{"t", "steps", "v_l2", "v_linf", "boundary_level", "tilde_w_linf", "boundary_warning"}, {}};
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const auto& s = traj.snapshots[k];
      const std::string wn = indexed("snapshots/w_", k), vn = indexed("snapshots/v_", k);
      lle::write_field(ctx.root / wn, s.w, s.time);
      lle::write_field(ctx.root / vn, s.v, s.time);
      outputs.push_back(wn);
      outputs.push_back(vn);
      track.rows.push_back({s.time, static_cast<double>(s.steps), lle::norm(s.v, lle::NormKind::L2),
                            lle::norm(s.v, lle::NormKind::Linf),
                            lle::boundary_level(s.v, c.integrator.boundary_fraction),
                            lle::norm(s.w - wave.profile, lle::NormKind::Linf), s.boundary_warning ? 1.0 : 0.0});
    }
    track.write(ctx.root / "tracks" / "evolve.csv");
    json j;
    j["snapshots"] = traj.snapshots.size();
    j["t_end"] = traj.snapshots.empty() ? 0.0 : traj.snapshots.back().time;
    j["contamination_time"] = traj.contamination_time ? json(*traj.contamination_time) : json(nullptr);
    j["warnings"] = traj.warnings;
    j["v0_h3"] = lle::norm(data.v0, lle::NormKind::H3);
    j["w0_l2"] = lle::norm(data.w0, lle::NormKind::L2);
    j["v0_linf"] = lle::norm(data.v0, lle::NormKind::Linf);
    write_json(ctx.root / "reports" / "evolve.json", j);
    for (const auto& w : traj.warnings) manifest.warn("evolve: " + w);

    Series vl{"|v|_inf", {}, {}}, bl{"boundary", {}, {}, true};
    for (const auto& r : track.rows) {
      vl.x.push_back(1.0 + r[0]);
      vl.y.push_back(r[3]);
      bl.x.push_back(1.0 + r[0]);
      bl.y.push_back(r[4]);
    }
    write_svg_plot(ctx.root / "plots" / "evolve.svg", {"localized perturbation", "1+t", "sup |v|", true, true},
                   {vl, bl});
    outputs.insert(outputs.end(), {"tracks/evolve.csv", "reports/evolve.json", "plots/evolve.svg"});
    return outputs;
  });
}

void stage_extract(const RunContext& ctx, RunManifest& manifest) {
  run_stage(ctx, manifest, "extract-modulation", [&] {
    const RunConfig& c = ctx.config;
    const lle::WaveProfile wave = load_wave(ctx.root);
    const lle::ZeroModeData zm = lle::compute_zero_mode(wave);
    const auto rep = lle::verify_assumptions(wave, c.bloch.xi_count, bloch_options(ctx));
    if (!rep.assumptions_hold())
      lle::fail(lle::ErrorCode::AssumptionsNotMet, "extract-modulation: spectral assumptions fail for this wave");
    auto split = std::make_shared<const lle::CriticalModeSplit>(wave, rep, c.tooth.cells);
    const lle::ToothData data = make_data(c, wave);

    lle::ModulationOptions mo;
    mo.sigma_method = c.modulation.sigma_method;
    mo.gamma_method = c.modulation.gamma_method;
    mo.sample_dt = c.integrator.sample_dt;
    mo.keep_every = c.modulation.keep_gamma_every;
    mo.gamma_x_limit = c.modulation.gamma_x_limit;
    mo.picard_tol = c.modulation.picard_tol;
    mo.max_sweeps = c.modulation.max_sweeps;
    lle::ModulationTracker tracker(wave, zm, split, data, mo);

    json identities = json::array();
    double worst_identity = 0.0;
    lle::EvolveOptions eo = evolve_options(c);
    eo.sample_stride = steps_for(c.integrator.sample_dt, c.integrator.dt);
    eo.observer = [&](const lle::SimulationState& s) {
      tracker.push(s);
      const auto& tr = tracker.track();
      if (tr.gamma_fields.empty() || tr.gamma_fields.back().first != s.time || s.time == 0.0) return;
      lle::ManufacturedFields m;
      m.u = s.u();
      m.u_t = lle::stationary_residual(m.u, wave.params);
      m.w = s.w;
      m.w_t = lle::stationary_residual(s.w, wave.params);
      m.sigma = tr.samples.back().sigma;
      m.sigma_t = tr.samples.back().sigma_dot;
      m.gamma = tr.gamma_fields.back().second;
      m.gamma_t = tr.gamma_t_fields.back().second;
      const auto inv = lle::residual_identity_inverse(m, wave);
      const auto fwd = lle::residual_identity_forward(m, wave);
      const double size = lle::norm(m.u, lle::NormKind::L2);
      worst_identity = std::max({worst_identity, relative(inv, size), relative(fwd, size)});
      identities.push_back(
          {{"t", s.time}, {"inverse", identity_json(inv, size)}, {"forward", identity_json(fwd, size)}});
    };
    const lle::Trajectory traj = lle::evolve(wave, data, eo);
    const lle::ModulationTrack track = tracker.finish();

    // The replay must reproduce the stored snapshots bit for bit.
    double replay = 0.0;
    std::size_t compared = 0;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const fs::path wp = ctx.root / indexed("snapshots/w_", k), vp = ctx.root / indexed("snapshots/v_", k);
      if (!fs::exists(wp) || !fs::exists(vp)) break;
      const auto ws = lle::read_field(wp), vs = lle::read_field(vp);
      replay = std::max({replay, lle::norm(ws.field - traj.snapshots[k].w, lle::NormKind::Linf),
                         lle::norm(vs.field - traj.snapshots[k].v, lle::NormKind::Linf),
                         std::abs(ws.time - traj.snapshots[k].time)});
      ++compared;
    }
    if (compared == 0) lle::fail(lle::ErrorCode::Io, "extract-modulation: no stored snapshots; run evolve first");
    if (replay != 0.0) manifest.warn("extract-modulation: replay differs from stored snapshots");

    // Manufactured fields give an independent check of the same algebra.
    lle::ManufactureSpec ms;
    ms.points_per_cell = 256;
    const auto mf = lle::manufacture(wave, ms);
    const auto m_inv = lle::residual_identity_inverse(mf, wave);
    const auto m_fwd = lle::residual_identity_forward(mf, wave);

    std::vector<std::string> outputs;
    Table mod{{"t", "sigma", "sigma_dot"}, {}};
    for (std::size_t k = 0; k < track.sigma.times.size(); ++k)
      mod.rows.push_back({track.sigma.times[k], track.sigma.sigma[k], track.sigma.sigma_dot[k]});
    mod.write(ctx.root / "tracks" / "modulation.csv");

    Table norms{sample_columns(), {}};
    std::vector<std::vector<double>> cols;
    for (const auto& n : lle::series_names()) cols.push_back(lle::series(track.samples, n));
    for (std::size_t k = 0; k < track.samples.size(); ++k) {
      const auto& s = track.samples[k];
      std::vector<double> row{s.t, s.boundary_warning ? 1.0 : 0.0, s.gamma_valid ? 1.0 : 0.0};
      for (const auto& col : cols) row.push_back(col[k]);
      norms.rows.push_back(std::move(row));
    }
    norms.write(ctx.root / "tracks" / "norms.csv");

    for (std::size_t k = 0; k < track.gamma_fields.size(); ++k) {
      const auto& [t, g] = track.gamma_fields[k];
      const auto& gt = track.gamma_t_fields[k].second;
      const std::string name = indexed("snapshots/gamma_", k);
      lle::write_field(ctx.root / name, lle::RealPairField::from_components(g.grid(), g.values(), gt.values()), t);
      outputs.push_back(name);
    }

    double gamma_initial = 0.0;
    for (const auto& s : track.samples)
      if (s.t <= 1.0) gamma_initial = std::max(gamma_initial, s.gamma_linf);

    json j;
    j["sigma_method"] = lle::to_string(track.sigma.method);
    j["gamma_method"] = lle::to_string(track.gamma_method);
    j["samples"] = track.samples.size();
    j["sigma_initial"] = track.sigma.sigma.empty() ? 0.0 : track.sigma.sigma.front();
    j["gamma_initial_layer_max"] = gamma_initial;
    j["sigma_star"] = track.sigma.sigma_star;
    j["sigma_star_rate"] = track.sigma.sigma_star_rate;
    j["sigma_star_residual"] = track.sigma.sigma_star_residual;
    j["validity_end"] = track.validity_end ? json(*track.validity_end) : json(nullptr);
    j["contamination_time"] = traj.contamination_time ? json(*traj.contamination_time) : json(nullptr);
    j["events"] = track.events;
    j["sweeps"] = track.sweeps;
    j["e_p"] = track.e_p;
    j["e_l"] = track.e_l;
    j["gap_delta0"] = rep.gap_delta0;
    j["critical_modes"] = split->modes().size();
    j["replay_max_difference"] = replay;
    j["replay_snapshots"] = compared;
    j["sup_u_minus_phi"] = 0.0;
    for (const auto& s : track.samples)
      j["sup_u_minus_phi"] = std::max(j["sup_u_minus_phi"].get<double>(), s.u_minus_phi_linf);
    if (has_localized(c)) {
      const auto energy =
          lle::verify_damping_inequality(track.samples, std::pow(lle::norm(data.v0, lle::NormKind::H3), 2));
      const auto tmpl = lle::template_eta(track.samples, track.e_l, track.e_p);
      const auto rel = lle::relate_check(track.samples);
      j["damping"] = {{"c_interpolation", energy.c_interpolation},
                      {"c_damping", energy.c_damping},
                      {"tightest_time", energy.tightest_time},
                      {"checked", energy.checked}};
      j["template"] = {{"c_key", tmpl.c_key},
                       {"bound", tmpl.bound},
                       {"eta_end", tmpl.eta.empty() ? 0.0 : tmpl.eta.back()},
                       {"bound_holds", tmpl.bound_holds}};
      j["relate"] = {{"c_l2", rel.c_l2}, {"c_h3", rel.c_h3}, {"c_linf", rel.c_linf},
                     {"checked", rel.checked}, {"excluded", rel.excluded}};
    }
    write_json(ctx.root / "reports" / "modulation.json", j);
    for (const auto& e : track.events) manifest.warn("extract-modulation: " + e);

    json id;
    id["trajectory"] = identities;
    id["trajectory_max_relative_to_field"] = worst_identity;
    id["manufactured"] = {{"points_per_cell", ms.points_per_cell},
                          {"inverse", identity_json(m_inv, lle::norm(mf.u, lle::NormKind::L2))},
                          {"forward", identity_json(m_fwd, lle::norm(mf.u, lle::NormKind::L2))}};
    write_json(ctx.root / "reports" / "identities.json", id);

    Series sg{"sigma", {}, {}};
    for (const auto& r : mod.rows) {
      sg.x.push_back(r[0]);
      sg.y.push_back(r[1]);
    }
    write_svg_plot(ctx.root / "plots" / "sigma.svg", {"co-periodic phase", "t", "sigma"}, {sg});
    std::vector<Series> ns;
    for (const char* n : {"hat_v_l2", "ring_v_linf", "gamma_x_linf", "hat_w_h1"}) {
      Series s{n, {}, {}};
      const auto y = lle::series(track.samples, n);
      for (std::size_t k = 0; k < y.size(); ++k) {
        s.x.push_back(1.0 + track.samples[k].t);
        s.y.push_back(y[k]);
      }
      ns.push_back(std::move(s));
    }
    write_svg_plot(ctx.root / "plots" / "norms.svg", {"modulated norms", "1+t", "norm", true, true}, ns);

    outputs.insert(outputs.end(), {"tracks/modulation.csv", "tracks/norms.csv", "reports/modulation.json",
                                   "reports/identities.json", "plots/sigma.svg", "plots/norms.svg"});
    return outputs;
  });
}

void stage_decay(const RunContext& ctx, RunManifest& manifest, const std::string& norm, lle::DecayModel model) {
  const std::string tag = norm + "_" + lle::to_string(model);
  run_stage(ctx, manifest, "decay-fit:" + tag, [&] {
    const Table t = Table::read(ctx.root / "tracks" / "norms.csv");
    const auto times = t.column("t"), y = t.column(norm);
    const auto bw = t.column("boundary_warning"), gv = t.column("gamma_valid");
    std::size_t valid = 0;
    while (valid < times.size() && bw[valid] == 0.0 && gv[valid] == 1.0) ++valid;

    lle::WindowChoice window;
    if (model == lle::DecayModel::Algebraic) {
      window.last_decade = true;
    } else {
      window.t_min = 5.0;
      window.floor = 1e-13;
    }
    json j{{"norm", norm}, {"model", lle::to_string(model)}, {"valid_samples", valid},
           {"total_samples", times.size()}};
    Series data{norm, {}, {}}, fit{"fit", {}, {}, true};
    for (std::size_t k = 0; k < valid; ++k) {
      data.x.push_back(model == lle::DecayModel::Algebraic ? 1.0 + times[k] : times[k]);
      data.y.push_back(y[k]);
    }
    try {
      const auto r = lle::fit_series(times, y, valid, model, window, norm);
      j["status"] = "ok";
      j["rate"] = r.rate;
      j["exponent"] = r.exponent();
      j["prefactor"] = r.prefactor;
      j["t1"] = r.t1;
      j["t2"] = r.t2;
      j["r_squared"] = r.r_squared;
      j["samples"] = r.samples;
      j["boundary_valid"] = r.boundary_valid;
      for (double s : {r.t1, r.t2}) {
        fit.x.push_back(model == lle::DecayModel::Algebraic ? 1.0 + s : s);
        fit.y.push_back(model == lle::DecayModel::Algebraic ? r.prefactor * std::pow(1.0 + s, -r.rate)
                                                            : r.prefactor * std::exp(-r.rate * s));
      }
    } catch (const lle::Error& e) {
      if (e.code() != lle::ErrorCode::InsufficientData) throw;
      j["status"] = "inconclusive";
      j["reason"] = e.what();
    }
    const std::string report = "reports/decay_" + tag + ".json", plot = "plots/decay_" + tag + ".svg";
    write_json(ctx.root / report, j);
    write_svg_plot(ctx.root / plot,
                   {norm, model == lle::DecayModel::Algebraic ? "1+t" : "t", norm,
                    model == lle::DecayModel::Algebraic, true},
                   {data, fit});
    return std::vector<std::string>{report, plot};
  });
}

namespace {

struct Check {
  std::string name;
  std::string status;  // pass | fail | inconclusive | info
  json value;
  json limit;
  std::string detail;
};

const char* pass_if(bool ok) { return ok ? "pass" : "fail"; }

void decay_checks(const RunContext& ctx, std::vector<Check>& checks) {
  const auto& k = ctx.config.checks;
  auto read = [&](const std::string& tag) { return read_json(ctx.root / "reports" / ("decay_" + tag + ".json")); };
  auto add = [&](const std::string& name, const json& r, auto&& in_band, json limit) {
    if (r.at("status") != "ok") {
      checks.push_back({name, "inconclusive", nullptr, limit, r.value("reason", "")});
      return;
    }
    const double e = r.at("exponent"), r2 = r.at("r_squared");
    const bool ok = in_band(e) && r2 >= k.r_squared_min;
    checks.push_back({name, pass_if(ok), {{"exponent", e}, {"r_squared", r2}, {"t1", r.at("t1")}, {"t2", r.at("t2")}},
                      limit, ""});
  };
  if (has_localized(ctx.config)) {
    add("decay_hat_v_l2", read("hat_v_l2_algebraic"),
        [&](double e) { return e >= k.hat_v_l2_min && e <= k.hat_v_l2_max; },
        {{"exponent", {k.hat_v_l2_min, k.hat_v_l2_max}}, {"r_squared_min", k.r_squared_min}});
    add("decay_ring_v_linf", read("ring_v_linf_algebraic"), [&](double e) { return e <= k.ring_v_linf_max; },
        {{"exponent_max", k.ring_v_linf_max}, {"r_squared_min", k.r_squared_min}});
  }
  if (has_coperiodic(ctx.config)) {
    const json bloch = read_json(ctx.root / "reports" / "bloch.json");
    const double delta0 = bloch.at("gap_delta0");
    for (const char* n : {"hat_w_h1", "sigma_dot"}) {
      const json r = read(std::string(n) + "_exponential");
      const std::string name = std::string("coperiodic_rate_") + n;
      const json limit = {{"gap_delta0", delta0}, {"relative_tolerance", 0.15}};
      if (r.at("status") != "ok") {
        checks.push_back({name, "inconclusive", nullptr, limit, r.value("reason", "")});
        continue;
      }
      const double rate = r.at("rate");
      checks.push_back({name, pass_if(std::abs(rate - delta0) <= 0.15 * delta0),
                        {{"rate", rate}, {"r_squared", r.at("r_squared")}}, limit, ""});
    }
  }
}

}  // namespace

bool stage_verify(const RunContext& ctx, RunManifest& manifest) {
  for (const auto& f : default_fits(ctx.config))
    if (!fs::exists(ctx.root / "reports" / ("decay_" + f.norm + "_" + lle::to_string(f.model) + ".json")))
      stage_decay(ctx, manifest, f.norm, f.model);
  bool all_pass = false;
  run_stage(ctx, manifest, "verify-report", [&] {
    const RunConfig& c = ctx.config;
    const auto& k = c.checks;
    std::vector<Check> checks;

    const json wave = read_json(ctx.root / "wave" / "wave.json");
    const double res = wave.at("residual_l2"), tres = wave.at("translated_residual_l2");
    checks.push_back({"wave_residual", pass_if(res <= k.wave_residual), res, k.wave_residual, ""});
    checks.push_back({"wave_translation_residual", pass_if(tres <= k.wave_residual), tres, k.wave_residual, ""});

    const json bloch = read_json(ctx.root / "reports" / "bloch.json");
    std::string witness;
    if (bloch.contains("d1_witness")) {
      const auto w = bloch.at("d1_witness");
      char buf[128];
      std::snprintf(buf, sizeof buf, "witness lambda = %.6g%+.6gi at xi = %.6g", w[0].get<double>(),
                    w[1].get<double>(), bloch.at("d1_witness_xi").get<double>());
      witness = buf;
    }
    if (is_constant(c)) {
      checks.push_back({"spectral_stability", pass_if(bloch.at("d1")), bloch.at("d1"), true, witness});
      const double err = bloch.at("closed_form_max_error");
      checks.push_back({"closed_form_spectrum", pass_if(err <= 1e-10), err, 1e-10, ""});
    } else {
      checks.push_back({"spectral_d1", pass_if(bloch.at("d1")), bloch.at("d1"), true, witness});
      checks.push_back({"spectral_d2", pass_if(bloch.at("d2")), bloch.at("d2"), true, ""});
      checks.push_back({"spectral_d3", pass_if(bloch.at("d3")), bloch.at("d3"), true, ""});
      const double theta = bloch.at("theta_fit");
      checks.push_back({"theta_fit_positive", pass_if(theta > 0.0), theta, 0.0, ""});
      const double kr = bloch.at("kernel_residual");
      checks.push_back({"kernel_residual", pass_if(kr <= k.kernel_residual), kr, k.kernel_residual, ""});

      const json mod = read_json(ctx.root / "reports" / "modulation.json");
      const double replay = mod.at("replay_max_difference");
      checks.push_back({"replay_identical", pass_if(replay == 0.0), replay, 0.0, ""});
      const double s0 = mod.at("sigma_initial"), g0 = mod.at("gamma_initial_layer_max");
      checks.push_back({"sigma_initial_zero", pass_if(s0 == 0.0), s0, 0.0, ""});
      checks.push_back({"gamma_zero_for_t_le_1", pass_if(g0 == 0.0), g0, 0.0, ""});

      const json id = read_json(ctx.root / "reports" / "identities.json");
      const double traj = id.at("trajectory_max_relative_to_field");
      checks.push_back({"identities_trajectory", pass_if(traj <= k.identity_tol), traj, k.identity_tol, ""});
      const double mi = id.at("manufactured").at("inverse").at("residual_l2");
      const double mf = id.at("manufactured").at("forward").at("residual_l2");
      checks.push_back({"identities_manufactured", pass_if(std::max(mi, mf) <= 1e-8), std::max(mi, mf), 1e-8, ""});

      decay_checks(ctx, checks);

      if (has_localized(c)) {
        // A constant fitted on a handful of boundary-valid samples says nothing.
        constexpr std::size_t min_samples = 10;
        auto status = [&](bool ok, std::size_t n) { return n < min_samples ? "inconclusive" : pass_if(ok); };
        const json& d = mod.at("damping");
        const double cd_ = d.at("c_damping"), ci = d.at("c_interpolation");
        const std::size_t nd = d.at("checked");
        checks.push_back({"damping_constant", status(std::isfinite(cd_) && cd_ <= k.damping_max, nd),
                          {{"c_damping", cd_}, {"c_interpolation", ci}, {"checked", nd}}, k.damping_max,
                          nd < min_samples ? "too few boundary-valid samples" : ""});
        const json& r = mod.at("relate");
        const double cr = std::max({r.at("c_l2").get<double>(), r.at("c_h3").get<double>(),
                                    r.at("c_linf").get<double>()});
        const std::size_t nr = r.at("checked");
        checks.push_back({"relate_constants", status(std::isfinite(cr) && cr <= k.relate_max, nr), r, k.relate_max,
                          nr < min_samples ? "too few boundary-valid samples" : ""});
        const json& t = mod.at("template");
        checks.push_back({"template_bound", "info", t, nullptr,
                          "eta(t_end) <= 4 c_key E_l; reported, not gated"});
      }
      const json& ct = mod.at("contamination_time");
      checks.push_back({"boundary_contamination", "info", ct, nullptr,
                        ct.is_null() ? "none within the run" : "decay fits restricted to the earlier window"});
      checks.push_back({"sigma_star", "info",
                        {{"value", mod.at("sigma_star")}, {"rate", mod.at("sigma_star_rate")}}, nullptr, ""});
    }

    std::size_t passed = 0, failed = 0, inconclusive = 0;
    json list = json::array();
    for (const auto& ch : checks) {
      if (ch.status == "pass") ++passed;
      if (ch.status == "fail") ++failed;
      if (ch.status == "inconclusive") ++inconclusive;
      json e{{"name", ch.name}, {"status", ch.status}, {"value", ch.value}, {"limit", ch.limit}};
      if (!ch.detail.empty()) e["detail"] = ch.detail;
      list.push_back(e);
    }
    all_pass = failed == 0 && inconclusive == 0;
    json verdict{{"pass", all_pass},
                 {"passed", passed},
                 {"failed", failed},
                 {"inconclusive", inconclusive},
                 {"checks", list},
                 {"warnings", manifest.warnings()}};
    write_json(ctx.root / "reports" / "verdict.json", verdict);
    return std::vector<std::string>{"reports/verdict.json"};
  });
  if (ctx.resume && !all_pass) all_pass = read_json(ctx.root / "reports" / "verdict.json").at("pass");
  return all_pass;
}

ExitCode run_pipeline(const RunContext& ctx) {
  RunManifest manifest = open_run(ctx);
  stage_solve_wave(ctx, manifest);
  stage_bloch(ctx, manifest);
  if (!is_constant(ctx.config)) {
    stage_evolve(ctx, manifest);
    stage_extract(ctx, manifest);
    for (const auto& f : default_fits(ctx.config)) stage_decay(ctx, manifest, f.norm, f.model);
  }
  return stage_verify(ctx, manifest) ? ExitCode::Pass : ExitCode::CheckFailed;
}

}  // namespace lab
