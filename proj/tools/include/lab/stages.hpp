#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lab/config.hpp"
#include "lab/run_dir.hpp"
#include "lle/bloch.hpp"
#include "lle/diagnostics.hpp"
#include "lle/waves.hpp"

namespace lab {

struct RunContext {
  RunConfig config;
  fs::path root;
  unsigned threads = 1;
  bool resume = false;
};

enum class ExitCode : int { Pass = 0, CheckFailed = 1, Usage = 2, Numeric = 3 };

// Writes config.ini and opens the manifest; with resume, completed stages are reused.
RunManifest open_run(const RunContext& ctx);

// Each stage writes its outputs under the run directory and records itself in the manifest.
void stage_solve_wave(const RunContext& ctx, RunManifest& manifest);
void stage_bloch(const RunContext& ctx, RunManifest& manifest);
void stage_evolve(const RunContext& ctx, RunManifest& manifest);
void stage_extract(const RunContext& ctx, RunManifest& manifest);
void stage_decay(const RunContext& ctx, RunManifest& manifest, const std::string& norm, lle::DecayModel model);
// Returns true iff every acceptance check in reports/verdict.json passed.
bool stage_verify(const RunContext& ctx, RunManifest& manifest);

ExitCode run_pipeline(const RunContext& ctx);

// Wave stored by stage_solve_wave (wave/profile.bin plus wave/wave.json).
lle::WaveProfile load_wave(const fs::path& root);
// Restores a run configuration from <root>/config.ini.
RunConfig load_run_config(const fs::path& root);

struct DefaultFit {
  std::string norm;
  lle::DecayModel model;
};
std::vector<DefaultFit> default_fits(const RunConfig& config);

}  // namespace lab
