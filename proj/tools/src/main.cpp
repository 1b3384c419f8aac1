#include <CLI11.hpp>

#include <iostream>
#include <list>
#include <optional>
#include <thread>

#include "lab/config.hpp"
#include "lab/stages.hpp"
#include "lle/diagnostics.hpp"
#include "lle/error.hpp"

namespace {

using namespace lab;

struct Globals {
  std::string out = "run";
  std::string run;
  std::string wave;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool resume = false;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::vector<std::string> overrides;
};

// Subcommand flags are collected as section.key=value overrides.
struct Flag {
  std::string key;
  std::string value;
};

void add_flag(CLI::App* cmd, std::vector<Flag>& flags, const std::string& name, const std::string& key,
              const std::string& help) {
  flags.push_back({key, ""});
  cmd->add_option(name, flags.back().value, help);
}

// Copies an external wave (profile.bin with wave.json beside it) into the run and returns its parameters
// as overrides.
std::vector<std::string> import_wave(const fs::path& profile, const fs::path& root) {
  const fs::path meta = profile.parent_path() / "wave.json";
  if (!fs::exists(meta)) lle::fail(lle::ErrorCode::Io, "missing " + meta.string() + " next to the wave profile");
  const json j = read_json(meta);
  fs::create_directories(root / "wave");
  if (!fs::exists(root / "wave" / "profile.bin") || !fs::equivalent(profile, root / "wave" / "profile.bin")) {
    fs::copy_file(profile, root / "wave" / "profile.bin", fs::copy_options::overwrite_existing);
    fs::copy_file(meta, root / "wave" / "wave.json", fs::copy_options::overwrite_existing);
  }
  std::vector<std::string> out;
  for (const char* k : {"kind", "alpha", "beta", "forcing", "period", "points"}) {
    const json& v = j.at(k);
    out.push_back(std::string("wave.") + k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()));
  }
  return out;
}

RunContext make_context(const Globals& g, const std::vector<Flag>& flags) {
  RunContext ctx;
  ctx.root = g.run.empty() ? fs::path(g.out) : fs::path(g.run);
  if (!g.config.empty())
    ctx.config = load_config(g.config);
  else if (fs::exists(ctx.root / "config.ini"))
    ctx.config = load_run_config(ctx.root);
  if (!g.wave.empty())
    for (const auto& o : import_wave(g.wave, ctx.root)) apply_override(ctx.config, o);
  for (const auto& o : g.overrides) apply_override(ctx.config, o);
  for (const auto& f : flags)
    if (!f.value.empty()) apply_override(ctx.config, f.key + "=" + f.value);
  if (g.seed) ctx.config.run.seed = *g.seed;
  validate(ctx.config);
  ctx.threads = g.threads;
  ctx.resume = g.resume;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for periodic Lugiato-Lefever waves under localized perturbations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--out", g.out, "Run directory")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for spectral computations")->check(CLI::PositiveNumber);
  app.add_flag("--resume", g.resume, "Skip stages whose outputs are intact under the same configuration");
  app.add_option("--seed", g.seed, "Seed for random initial data");
  app.add_option("--config", g.config, "Configuration file (key = value sections, or JSON)");
  app.add_option("--set", g.overrides, "Override section.key=value; repeatable");

  std::list<std::vector<Flag>> storage;
  auto subcommand = [&](const std::string& name, const std::string& help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("--run", g.run, "Existing run directory (same as --out)");
    storage.emplace_back();
    storage.back().reserve(16);
    return std::pair<CLI::App*, std::vector<Flag>*>{cmd, &storage.back()};
  };

  auto [wave_cmd, wave_flags] = subcommand("solve-wave", "Compute the steady periodic wave");
  add_flag(wave_cmd, *wave_flags, "--kind", "wave.kind", "periodic or constant");
  add_flag(wave_cmd, *wave_flags, "--alpha", "wave.alpha", "Detuning");
  add_flag(wave_cmd, *wave_flags, "--beta", "wave.beta", "Dispersion sign (+1 or -1)");
  add_flag(wave_cmd, *wave_flags, "--forcing", "wave.forcing", "Forcing F");
  add_flag(wave_cmd, *wave_flags, "--period", "wave.period", "Wave period T");
  add_flag(wave_cmd, *wave_flags, "--points", "wave.points", "Grid points per period");

  auto [bloch_cmd, bloch_flags] = subcommand("bloch-spectrum", "Bloch spectrum and spectral assumptions");
  add_flag(bloch_cmd, *bloch_flags, "--xi-count", "bloch.xi_count", "Number of Bloch wavenumbers");
  bloch_cmd->add_option("--wave", g.wave, "Wave profile written by solve-wave")->check(CLI::ExistingFile);

  auto [evolve_cmd, evolve_flags] = subcommand("evolve", "Evolve the perturbed wave and store snapshots");
  add_flag(evolve_cmd, *evolve_flags, "--cells", "tooth.cells", "Number of periods M");
  add_flag(evolve_cmd, *evolve_flags, "--knockout", "tooth.knockout", "Knocked-out cells, comma separated");
  add_flag(evolve_cmd, *evolve_flags, "--depth", "tooth.depth", "Fraction of the signal removed");
  add_flag(evolve_cmd, *evolve_flags, "--tmax", "integrator.t_end", "Final time");
  add_flag(evolve_cmd, *evolve_flags, "--dt", "integrator.dt", "Time step");
  evolve_cmd->add_option("--wave", g.wave, "Wave profile written by solve-wave")->check(CLI::ExistingFile);
  std::optional<std::size_t> stride;
  evolve_cmd->add_option("--stride", stride, "Integrator steps between stored snapshots");

  auto [extract_cmd, extract_flags] = subcommand("extract-modulation", "Modulation functions and modulated norms");
  add_flag(extract_cmd, *extract_flags, "--method", "modulation.gamma_method", "duhamel or fit");
  add_flag(extract_cmd, *extract_flags, "--sigma-method", "modulation.sigma_method", "projection or fit");

  auto [decay_cmd, decay_flags] = subcommand("decay-fit", "Fit a decay law to a stored norm track");
  std::string norm_name, model_name = "algebraic";
  decay_cmd->add_option("--norm", norm_name, "Series name, e.g. ring_v_linf")->required();
  decay_cmd->add_option("--model", model_name, "algebraic or exponential")->capture_default_str();

  auto [verify_cmd, verify_flags] = subcommand("verify-report", "Evaluate the acceptance checks of a run");
  auto [pipe_cmd, pipe_flags] = subcommand("pipeline", "Run every stage and write the verdict");
  (void)decay_flags;
  (void)verify_flags;
  (void)pipe_flags;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::Usage);
  }

  try {
    CLI::App* used = app.get_subcommands().front();
    std::vector<Flag> flags;
    for (auto& list : storage)
      for (auto& f : list) flags.push_back(f);
    RunContext ctx = make_context(g, flags);
    if (stride) {
      ctx.config.integrator.snapshot_every = static_cast<double>(*stride) * ctx.config.integrator.dt;
      validate(ctx.config);
    }

    if (used == pipe_cmd) return static_cast<int>(run_pipeline(ctx));
    RunManifest manifest = open_run(ctx);
    if (used == wave_cmd) stage_solve_wave(ctx, manifest);
    if (used == bloch_cmd) stage_bloch(ctx, manifest);
    if (used == evolve_cmd) stage_evolve(ctx, manifest);
    if (used == extract_cmd) stage_extract(ctx, manifest);
    if (used == decay_cmd) {
      stage_decay(ctx, manifest, norm_name, lle::parse_decay_model(model_name));
      const json r = read_json(ctx.root / "reports" / ("decay_" + norm_name + "_" + lle::to_string(lle::parse_decay_model(model_name)) + ".json"));
      std::cout << r.dump(2) << "\n";
      return r.at("status") == "ok" ? 0 : static_cast<int>(ExitCode::CheckFailed);
    }
    if (used == verify_cmd) {
      const bool pass = stage_verify(ctx, manifest);
      std::cout << read_text(ctx.root / "reports" / "verdict.json");
      return pass ? 0 : static_cast<int>(ExitCode::CheckFailed);
    }
    return 0;
  } catch (const lle::Error& e) {
    std::cerr << "lle-lab: " << lle::to_string(e.code()) << ": " << e.what() << "\n";
    return static_cast<int>(lle::is_numeric(e.code()) ? ExitCode::Numeric : ExitCode::Usage);
  } catch (const std::exception& e) {
    std::cerr << "lle-lab: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Usage);
  }
}
