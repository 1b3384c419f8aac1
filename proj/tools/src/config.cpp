#include "lab/config.hpp"

#define BOOST_BIND_GLOBAL_PLACEHOLDERS
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "lle/error.hpp"

namespace lab {
namespace {

using lle::ErrorCode;
using lle::fail;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& text) {
  fail(ErrorCode::InvalidArgument, "config: cannot parse '" + text + "' for " + key);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) bad_value(key, text);
  return value;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

// Converters between member types and their text form.
std::string to_text(double v) { return format_double(v); }
template <std::integral T>
std::string to_text(T v) requires(!std::is_same_v<T, bool>) { return std::to_string(v); }
std::string to_text(bool v) { return v ? "true" : "false"; }
std::string to_text(const std::string& v) { return v; }
std::string to_text(lle::SigmaMethod v) { return lle::to_string(v); }
std::string to_text(lle::GammaMethod v) { return lle::to_string(v); }
template <class T>
std::string to_text(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + to_text(v[i]);
  return out;
}

void from_text(const std::string& key, const std::string& s, double& v) { v = parse_number<double>(key, s); }
template <std::integral T>
void from_text(const std::string& key, const std::string& s, T& v) requires(!std::is_same_v<T, bool>) {
  v = parse_number<T>(key, s);
}
void from_text(const std::string& key, const std::string& s, bool& v) {
  const std::string t = trim(s);
  if (t == "true" || t == "1") v = true;
  else if (t == "false" || t == "0") v = false;
  else bad_value(key, t);
}
void from_text(const std::string&, const std::string& s, std::string& v) { v = trim(s); }
void from_text(const std::string&, const std::string& s, lle::SigmaMethod& v) { v = lle::parse_sigma_method(trim(s)); }
void from_text(const std::string&, const std::string& s, lle::GammaMethod& v) { v = lle::parse_gamma_method(trim(s)); }
template <class T>
void from_text(const std::string& key, const std::string& s, std::vector<T>& v) {
  v.clear();
  for (const auto& item : split_list(s)) {
    T x{};
    from_text(key, item, x);
    v.push_back(x);
  }
}

struct Binding {
  std::string section, key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class S, class T>
Binding bind(const char* section, const char* key, S RunConfig::*sub, T S::*field) {
  const std::string name = std::string(section) + "." + key;
  return {section, key, [sub, field](const RunConfig& c) { return to_text(c.*sub.*field); },
          [sub, field, name](RunConfig& c, const std::string& s) { from_text(name, s, c.*sub.*field); }};
}

const std::vector<Binding>& registry() {
  static const std::vector<Binding> table = {
      bind("wave", "kind", &RunConfig::wave, &WaveConfig::kind),
      bind("wave", "alpha", &RunConfig::wave, &WaveConfig::alpha),
      bind("wave", "beta", &RunConfig::wave, &WaveConfig::beta),
      bind("wave", "forcing", &RunConfig::wave, &WaveConfig::forcing),
      bind("wave", "period", &RunConfig::wave, &WaveConfig::period),
      bind("wave", "points", &RunConfig::wave, &WaveConfig::points),
      bind("wave", "seed_amplitudes", &RunConfig::wave, &WaveConfig::seed_amplitudes),
      bind("bloch", "xi_count", &RunConfig::bloch, &BlochConfig::xi_count),
      bind("bloch", "kernel_tol", &RunConfig::bloch, &BlochConfig::kernel_tol),
      bind("bloch", "spec_tol", &RunConfig::bloch, &BlochConfig::spec_tol),
      bind("bloch", "fit_tol_factor", &RunConfig::bloch, &BlochConfig::fit_tol_factor),
      bind("tooth", "cells", &RunConfig::tooth, &ToothConfig::cells),
      bind("tooth", "knockout", &RunConfig::tooth, &ToothConfig::knockout),
      bind("tooth", "smoothing_width", &RunConfig::tooth, &ToothConfig::smoothing_width),
      bind("tooth", "depth", &RunConfig::tooth, &ToothConfig::depth),
      bind("tooth", "coperiodic_l2", &RunConfig::tooth, &ToothConfig::coperiodic_l2),
      bind("tooth", "coperiodic_modes", &RunConfig::tooth, &ToothConfig::coperiodic_modes),
      bind("tooth", "bump_amplitude", &RunConfig::tooth, &ToothConfig::bump_amplitude),
      bind("tooth", "bump_width_periods", &RunConfig::tooth, &ToothConfig::bump_width_periods),
      bind("integrator", "dt", &RunConfig::integrator, &IntegratorConfig::dt),
      bind("integrator", "t_end", &RunConfig::integrator, &IntegratorConfig::t_end),
      bind("integrator", "snapshot_every", &RunConfig::integrator, &IntegratorConfig::snapshot_every),
      bind("integrator", "sample_dt", &RunConfig::integrator, &IntegratorConfig::sample_dt),
      bind("integrator", "dealias", &RunConfig::integrator, &IntegratorConfig::dealias),
      bind("integrator", "boundary_tol", &RunConfig::integrator, &IntegratorConfig::boundary_tol),
      bind("integrator", "boundary_fraction", &RunConfig::integrator, &IntegratorConfig::boundary_fraction),
      bind("modulation", "sigma_method", &RunConfig::modulation, &ModulationConfig::sigma_method),
      bind("modulation", "gamma_method", &RunConfig::modulation, &ModulationConfig::gamma_method),
      bind("modulation", "gamma_x_limit", &RunConfig::modulation, &ModulationConfig::gamma_x_limit),
      bind("modulation", "picard_tol", &RunConfig::modulation, &ModulationConfig::picard_tol),
      bind("modulation", "max_sweeps", &RunConfig::modulation, &ModulationConfig::max_sweeps),
      bind("modulation", "keep_gamma_every", &RunConfig::modulation, &ModulationConfig::keep_gamma_every),
      bind("checks", "wave_residual", &RunConfig::checks, &CheckConfig::wave_residual),
      bind("checks", "kernel_residual", &RunConfig::checks, &CheckConfig::kernel_residual),
      bind("checks", "hat_v_l2_min", &RunConfig::checks, &CheckConfig::hat_v_l2_min),
      bind("checks", "hat_v_l2_max", &RunConfig::checks, &CheckConfig::hat_v_l2_max),
      bind("checks", "ring_v_linf_max", &RunConfig::checks, &CheckConfig::ring_v_linf_max),
      bind("checks", "r_squared_min", &RunConfig::checks, &CheckConfig::r_squared_min),
      bind("checks", "relate_max", &RunConfig::checks, &CheckConfig::relate_max),
      bind("checks", "damping_max", &RunConfig::checks, &CheckConfig::damping_max),
      bind("checks", "identity_tol", &RunConfig::checks, &CheckConfig::identity_tol),
      bind("run", "seed", &RunConfig::run, &RunSection::seed),
  };
  return table;
}

const Binding& find_binding(const std::string& section, const std::string& key) {
  for (const auto& b : registry())
    if (b.section == section && b.key == key) return b;
  fail(ErrorCode::InvalidArgument, "config: unknown key " + section + "." + key);
}

bool is_multiple(double a, double b) {
  const double r = a / b;
  return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, r);
}

void check(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidArgument, "config: " + what);
}

}  // namespace

lle::WaveParameters RunConfig::wave_parameters() const {
  lle::WaveParameters p;
  p.alpha = wave.alpha;
  p.beta = wave.beta;
  p.forcing = wave.forcing;
  p.period = wave.period;
  return p;
}

std::string serialize(const RunConfig& config) {
  std::string out, section;
  for (const auto& b : registry()) {
    if (b.section != section) {
      out += (section.empty() ? "[" : "\n[") + b.section + "]\n";
      section = b.section;
    }
    out += b.key + " = " + b.get(config) + "\n";
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{')
      pt::read_json(in, tree);
    else
      pt::read_ini(in, tree);
  } catch (const pt::file_parser_error& e) {
    fail(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, node] : tree) {
    if (node.empty()) fail(ErrorCode::InvalidArgument, "config: key '" + section + "' outside a section");
    for (const auto& [key, leaf] : node) {
      const Binding& b = find_binding(section, key);
      if (!leaf.empty()) {
        // JSON arrays arrive as child lists.
        std::string joined;
        for (const auto& [unused, item] : leaf) joined += (joined.empty() ? "" : ",") + item.data();
        b.set(c, joined);
      } else {
        b.set(c, leaf.data());
      }
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  check(c.wave.kind == "periodic" || c.wave.kind == "constant", "wave.kind must be periodic or constant");
  check(c.wave.beta == 1 || c.wave.beta == -1, "wave.beta must be +1 or -1");
  check(c.wave.forcing >= 0.0 && std::isfinite(c.wave.forcing), "wave.forcing must be >= 0");
  check(c.wave.period > 0.0, "wave.period must be positive");
  check(c.wave.points >= 16 && c.wave.points % 2 == 0, "wave.points must be even and >= 16");
  check(c.wave.kind == "constant" || !c.wave.seed_amplitudes.empty(), "wave.seed_amplitudes is empty");
  check(c.bloch.xi_count >= 16 && c.bloch.xi_count % 2 == 0, "bloch.xi_count must be even and >= 16");
  check(c.bloch.kernel_tol > 0 && c.bloch.spec_tol > 0 && c.bloch.fit_tol_factor > 0, "bloch tolerances must be positive");
  check(c.tooth.cells >= 2 && c.tooth.cells % 2 == 0, "tooth.cells must be even and >= 2");
  for (auto k : c.tooth.knockout) check(k < c.tooth.cells, "tooth.knockout cell out of range");
  check(c.tooth.smoothing_width >= 0.0, "tooth.smoothing_width must be >= 0");
  check(c.tooth.depth >= 0.0 && c.tooth.depth <= 1.0, "tooth.depth must lie in [0, 1]");
  check(c.tooth.coperiodic_l2 >= 0.0, "tooth.coperiodic_l2 must be >= 0");
  check(c.tooth.coperiodic_modes >= 1, "tooth.coperiodic_modes must be >= 1");
  check(c.tooth.bump_width_periods > 0.0, "tooth.bump_width_periods must be positive");
  check(c.integrator.dt > 0.0 && c.integrator.dt <= 0.1, "integrator.dt must lie in (0, 0.1]");
  check(c.integrator.t_end > 0.0, "integrator.t_end must be positive");
  check(c.integrator.sample_dt > 0.0 && is_multiple(c.integrator.sample_dt, c.integrator.dt),
        "integrator.sample_dt must be a positive multiple of dt");
  check(c.integrator.snapshot_every > 0.0 && is_multiple(c.integrator.snapshot_every, c.integrator.dt),
        "integrator.snapshot_every must be a positive multiple of dt");
  check(is_multiple(c.integrator.t_end, c.integrator.dt), "integrator.t_end must be a multiple of dt");
  check(c.integrator.boundary_tol > 0.0, "integrator.boundary_tol must be positive");
  check(c.integrator.boundary_fraction > 0.0 && c.integrator.boundary_fraction < 0.5,
        "integrator.boundary_fraction must lie in (0, 0.5)");
  check(c.modulation.gamma_x_limit > 0.0 && c.modulation.gamma_x_limit < 1.0,
        "modulation.gamma_x_limit must lie in (0, 1)");
  check(c.modulation.picard_tol > 0.0, "modulation.picard_tol must be positive");
  check(c.modulation.max_sweeps >= 1, "modulation.max_sweeps must be >= 1");
  check(c.checks.hat_v_l2_min < c.checks.hat_v_l2_max, "checks.hat_v_l2_min must be below hat_v_l2_max");
  check(c.checks.r_squared_min >= 0.0 && c.checks.r_squared_min <= 1.0, "checks.r_squared_min must lie in [0, 1]");
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    fail(ErrorCode::InvalidArgument, "override must look like section.key=value: " + assignment);
  const Binding& b = find_binding(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)));
  b.set(config, assignment.substr(eq + 1));
}

}  // namespace lab
