#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lle/grid.hpp"
#include "lle/modulation.hpp"

namespace lle {

// <J M(base) f, f> with M(base) = 2[[-2 a b, a^2 - b^2], [a^2 - b^2, 2 a b]], optionally with (J M)^T.
double jm_quadratic_form(const RealPairField& base, const RealPairField& f, bool transposed = false);

// E_j = ||d^j f||^2 - (1 / (2 beta)) <J M(base) d^{j-1} f, d^{j-1} f>.
double damping_energy(const RealPairField& ring_v, const RealPairField& ring_phi, int beta, int j);

enum class DecayModel { Algebraic, Exponential };
DecayModel parse_decay_model(const std::string& name);
std::string to_string(DecayModel m);

struct DecayReport {
  std::string norm_name;
  DecayModel model = DecayModel::Algebraic;
  double rate = 0.0;  // kappa in y ~ (1+t)^{-kappa}, or delta in y ~ e^{-delta t}
  double prefactor = 0.0;
  double t1 = 0.0, t2 = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
  bool boundary_valid = true;
  double exponent() const { return -rate; }
};

// Least squares of log y against log(1+t) or t. Requires at least 10 positive samples and, for the
// algebraic model, (1 + t2) / (1 + t1) >= 10.
DecayReport fit_decay(const std::vector<double>& t, const std::vector<double>& y, DecayModel model,
                      const std::string& name = {});

// Series extracted from a modulation track by name (hat_v_l2, ring_v_linf, sigma_dot, ...).
std::vector<std::string> series_names();
std::vector<double> series(const std::vector<SampleNorms>& samples, const std::string& name);

struct WindowChoice {
  double t_min = 0.0;
  double t_max = 1e300;
  bool last_decade = false;  // keep only [(1 + t_end) / 10 - 1, t_end] of the valid window
  double floor = 0.0;        // drop samples with y <= floor
};

// Fit over the first valid_count samples (the boundary- and gamma-valid prefix) within the window.
DecayReport fit_series(const std::vector<double>& t, const std::vector<double>& y, std::size_t valid_count,
                       DecayModel model, const WindowChoice& window, const std::string& name = {});

// Number of leading samples without boundary warnings and inside the gamma validity window.
std::size_t valid_prefix(const std::vector<SampleNorms>& samples);

// fit_series on a named series of a modulation track.
DecayReport fit_track(const std::vector<SampleNorms>& samples, const std::string& name, DecayModel model,
                      const WindowChoice& window);

struct EnergyReport {
  double c_interpolation = 0.0;  // smallest C with ||d^j v||^2 <= 2 E_j + C ||v||^2
  double c_damping = 0.0;        // smallest C making the damping inequality hold at every sample
  double tightest_time = 0.0;
  std::size_t checked = 0;
};

// Integral by the trapezoid rule over the sample times.
EnergyReport verify_damping_inequality(const std::vector<SampleNorms>& samples, double v0_h3_sq);

struct TemplateTrack {
  std::vector<double> times;
  std::vector<double> eta;
  double c_key = 0.0;        // max eta / (E_l + eta^2 + eta E_p)
  double bound = 0.0;        // 4 c_key E_l
  bool bound_holds = false;  // eta(t_end) <= bound
};

TemplateTrack template_eta(const std::vector<SampleNorms>& samples, double e_l, double e_p);

struct RelateReport {
  double c_l2 = 0.0;
  double c_h3 = 0.0;
  double c_linf = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;
};

RelateReport relate_check(const std::vector<SampleNorms>& samples);

}  // namespace lle
