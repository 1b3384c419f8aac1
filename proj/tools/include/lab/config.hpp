#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lle/modulation.hpp"
#include "lle/waves.hpp"

namespace lab {

struct WaveConfig {
  std::string kind = "periodic";  // periodic | constant
  double alpha = 1.0;
  int beta = -1;
  double forcing = 1.1;
  double period = 6.283185307179586;
  std::size_t points = 128;
  std::vector<double> seed_amplitudes{0.6, 0.3, 1.0};
  bool operator==(const WaveConfig&) const = default;
};

struct BlochConfig {
  std::size_t xi_count = 64;
  double kernel_tol = 1e-8;
  double spec_tol = 1e-7;
  double fit_tol_factor = 1e-3;
  bool operator==(const BlochConfig&) const = default;
};

struct ToothConfig {
  std::size_t cells = 64;
  std::vector<std::size_t> knockout{32};
  double smoothing_width = 0.5;
  double depth = 0.05;
  double coperiodic_l2 = 0.0;
  long coperiodic_modes = 8;
  double bump_amplitude = 0.05;
  double bump_width_periods = 2.0;
  bool operator==(const ToothConfig&) const = default;
};

struct IntegratorConfig {
  double dt = 0.01;
  double t_end = 200.0;
  double snapshot_every = 10.0;
  double sample_dt = 0.1;
  bool dealias = true;
  double boundary_tol = 1e-3;
  double boundary_fraction = 0.1;
  bool operator==(const IntegratorConfig&) const = default;
};

struct ModulationConfig {
  lle::SigmaMethod sigma_method = lle::SigmaMethod::Projection;
  lle::GammaMethod gamma_method = lle::GammaMethod::Duhamel;
  double gamma_x_limit = 0.5;
  double picard_tol = 1e-8;
  int max_sweeps = 20;
  std::size_t keep_gamma_every = 100;
  bool operator==(const ModulationConfig&) const = default;
};

struct CheckConfig {
  double wave_residual = 1e-10;
  double kernel_residual = 1e-8;
  double hat_v_l2_min = -0.75;
  double hat_v_l2_max = -0.35;
  double ring_v_linf_max = -0.55;
  double r_squared_min = 0.9;
  double relate_max = 10.0;
  double damping_max = 1e3;
  double identity_tol = 1e-6;
  bool operator==(const CheckConfig&) const = default;
};

struct RunSection {
  std::uint64_t seed = 1;
  bool operator==(const RunSection&) const = default;
};

struct RunConfig {
  WaveConfig wave;
  BlochConfig bloch;
  ToothConfig tooth;
  IntegratorConfig integrator;
  ModulationConfig modulation;
  CheckConfig checks;
  RunSection run;
  bool operator==(const RunConfig&) const = default;

  lle::WaveParameters wave_parameters() const;
};

// Key = value text with [sections]; every key is written, doubles to 17 significant digits.
std::string serialize(const RunConfig& config);
// Accepts the same text, or a JSON object of sections. Unknown keys and out-of-range values throw.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void validate(const RunConfig& config);

// Overrides of the form section.key=value.
void apply_override(RunConfig& config, const std::string& assignment);

}  // namespace lab
