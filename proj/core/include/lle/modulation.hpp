#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lle/bloch.hpp"
#include "lle/evolution.hpp"
#include "lle/grid.hpp"
#include "lle/waves.hpp"

namespace lle {

enum class SigmaMethod { Projection, Fit };
enum class GammaMethod { Duhamel, Fit };

SigmaMethod parse_sigma_method(const std::string& name);
GammaMethod parse_gamma_method(const std::string& name);
std::string to_string(SigmaMethod m);
std::string to_string(GammaMethod m);

// Weights for the integral over [0, t_k] of samples at j * dt whose integrand vanishes to all
// orders at the right end: trapezoid with fourth-order Gregory correction on the left.
double left_corrected_weight(std::size_t j, std::size_t k);

struct SigmaTrack {
  SigmaMethod method = SigmaMethod::Projection;
  std::vector<double> times;
  std::vector<double> sigma;
  std::vector<double> sigma_dot;
  double sigma_star = 0.0;
  double sigma_star_rate = 0.0;      // exponential rate of the tail fit of sigma_dot
  double sigma_star_residual = 0.0;  // 1 - R^2 of that fit
};

// Explicit time marching of the projection formula; samples must be pushed at t = k * dt.
class SigmaMarcher {
 public:
  SigmaMarcher(const WaveProfile& wave, const ZeroModeData& zm, const RealPairField& w_initial, double dt);
  // Returns (sigma, sigma_dot) at the pushed time.
  std::pair<double, double> push(const RealPairField& w);
  std::size_t size() const noexcept { return sigma_.size(); }
  const std::vector<double>& sigma() const noexcept { return sigma_; }
  const std::vector<double>& sigma_dot() const noexcept { return sigma_dot_; }

 private:
  WaveProfile wave_;
  ZeroModeData zm_;
  double dt_;
  double c0_;
  std::vector<double> f_, sigma_, sigma_dot_;
};

// argmin_s ||w(. - s) - phi||_{L2(0,T)} by Newton on the Fourier correlation, continued from `start`.
double fit_phase(const RealPairField& w, const RealPairField& phi, double start);

// Offline sigma from a w track on a uniform time grid.
SigmaTrack extract_sigma(const std::vector<double>& times, const std::vector<RealPairField>& w_track,
                         const WaveProfile& wave, const ZeroModeData& zm, SigmaMethod method);
void finish_sigma_star(SigmaTrack& track);

struct InversePerturbations {
  RealPairField hat_w;  // one period
  RealPairField hat_v;  // full domain
};
struct ForwardPerturbations {
  RealPairField ring_w;  // one period
  RealPairField ring_v;  // full domain
};

InversePerturbations inverse_modulated(const SimulationState& s, double sigma, const ScalarField& gamma,
                                       const WaveProfile& wave);
ForwardPerturbations forward_modulated(const SimulationState& s, double sigma, const ScalarField& gamma,
                                       const WaveProfile& wave);

// Scalar diagnostics recorded at every sample.
struct SampleNorms {
  double t = 0.0;
  bool boundary_warning = false;
  bool gamma_valid = true;  // sup_s ||gamma_x(s)||_inf <= limit so far
  double sigma = 0.0, sigma_dot = 0.0;
  double hat_w_l2 = 0.0, hat_w_h1 = 0.0, ring_w_h1 = 0.0, tilde_w_linf = 0.0;
  double hat_v_l2 = 0.0, hat_v_linf = 0.0, hat_v_h3 = 0.0;
  double ring_v_l2 = 0.0, ring_v_linf = 0.0, ring_v_h3 = 0.0;
  double ring_v_deriv_sq[4] = {0, 0, 0, 0};  // ||d^j ring_v||^2
  double energy[4] = {0, 0, 0, 0};           // E_1..E_3 in slots 1..3
  double gamma_l2 = 0.0, gamma_linf = 0.0;
  double gamma_x_l2 = 0.0, gamma_x_linf = 0.0, gamma_x_h3 = 0.0, gamma_x_h4 = 0.0;
  double gamma_x_hsq[4] = {0, 0, 0, 0};  // ||gamma_x||^2_{H^{j+1}} for j = 1..3
  double gamma_t_hsq[4] = {0, 0, 0, 0};  // ||gamma_t||^2_{H^j}
  double gamma_t_h3 = 0.0;
  double v_l2 = 0.0, v_linf = 0.0, u_minus_phi_linf = 0.0;
};

struct ModulationOptions {
  SigmaMethod sigma_method = SigmaMethod::Projection;
  GammaMethod gamma_method = GammaMethod::Duhamel;
  double sample_dt = 0.1;
  std::size_t keep_every = 0;  // keep gamma fields every k samples; 0 keeps none
  double gamma_x_limit = 0.5;
  bool energies = true;
  double picard_tol = 1e-8;
  int max_sweeps = 20;
};

struct ModulationTrack {
  SigmaTrack sigma;
  GammaMethod gamma_method = GammaMethod::Duhamel;
  std::vector<SampleNorms> samples;
  std::vector<std::pair<double, ScalarField>> gamma_fields;
  std::vector<std::pair<double, ScalarField>> gamma_t_fields;
  std::optional<double> validity_end;  // first time ||gamma_x||_inf exceeded the limit
  int sweeps = 1;
  double sweep_difference = 0.0;
  std::vector<double> sweep_ratios;
  std::vector<std::string> events;
  double e_p = 0.0, e_l = 0.0;
};

// Consumes states at t = k * sample_dt and builds sigma, gamma and every modulated quantity causally.
class ModulationTracker {
 public:
  ModulationTracker(const WaveProfile& wave, const ZeroModeData& zm, std::shared_ptr<const CriticalModeSplit> split,
                    const ToothData& data, const ModulationOptions& options);
  ~ModulationTracker();
  void push(const SimulationState& s);
  ModulationTrack finish();
  const ModulationTrack& track() const noexcept { return track_; }

 private:
  friend ModulationTrack extract_modulation(const std::vector<SimulationState>&, const WaveProfile&,
                                            const ZeroModeData&, std::shared_ptr<const CriticalModeSplit>,
                                            const ToothData&, const ModulationOptions&);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  ModulationTrack track_;
};

// Offline extraction over a stored trajectory on a uniform sample grid: one causal sweep followed by
// Picard sweeps of the full-window fixed-point map until successive iterates agree.
ModulationTrack extract_modulation(const std::vector<SimulationState>& states, const WaveProfile& wave,
                                   const ZeroModeData& zm, std::shared_ptr<const CriticalModeSplit> split,
                                   const ToothData& data, const ModulationOptions& options);

// Local phase per cell from a windowed least-squares fit, interpolated trigonometrically.
ScalarField fit_gamma(const SimulationState& s, double sigma, const WaveProfile& wave,
                      const ScalarField* previous);

}  // namespace lle
