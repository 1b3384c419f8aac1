#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lle/grid.hpp"
#include "lle/parameters.hpp"
#include "lle/waves.hpp"

namespace lle {

struct ToothPerturbation {
  RealPairField coperiodic_seed;  // w0 on one period; an empty field means zero
  std::vector<std::size_t> knocked_out_cells;
  double smoothing_width = 0.0;
  // Fraction of the signal removed on knocked-out cells; 1 switches the signal off.
  double depth = 1.0;
  std::optional<RealPairField> extra_localized;
};

struct ToothData {
  RealPairField w0;  // co-periodic perturbation, one period
  RealPairField v0;  // localized perturbation, full domain
};

// Sum of erf-mollified indicators of the listed cells, periodic images included.
ScalarField cell_indicator(const PeriodicGrid& full, const std::vector<std::size_t>& cells, double width);

ToothData make_tooth_data(const WaveProfile& wave, const ToothPerturbation& spec, std::size_t num_cells);

// Band-limited random co-periodic field with modes |j| <= max_mode, scaled to the given L2 norm.
RealPairField random_coperiodic(const PeriodicGrid& cell, double l2_size, long max_mode, std::uint64_t seed);
// amplitude * phi'(x) * exp(-(x - center)^2 / (2 width^2)) on the full domain.
RealPairField localized_phase_bump(const WaveProfile& wave, const PeriodicGrid& full, double amplitude,
                                   double center, double width);

struct IntegratorOptions {
  double dt = 5e-3;
  bool dealias = true;
  int contour_points = 64;
};

struct SimulationState {
  double time = 0.0;
  RealPairField w;  // full co-periodic field on one period (phi + w-tilde)
  RealPairField v;  // localized field on the full domain
  double dt = 0.0;
  std::size_t steps = 0;
  bool boundary_warning = false;

  RealPairField u() const;
};

// Cox-Matthews ETDRK4 coefficients for a diagonal linear symbol, by contour averaging.
struct EtdCoefficients {
  CVec e, e_half, q, f1, f2, f3;
  std::vector<double> mask;
};
EtdCoefficients etd_coefficients(const PeriodicGrid& grid, const WaveParameters& params,
                                 const IntegratorOptions& options);

// Advances w on one period and v on M periods with shared stages; the state is kept in Fourier space.
class CoupledIntegrator {
 public:
  CoupledIntegrator(const WaveParameters& params, const SimulationState& initial,
                    const IntegratorOptions& options = {});
  void step();
  void advance_to(double t);
  double time() const noexcept { return time_; }
  std::size_t steps() const noexcept { return steps_; }
  SimulationState state() const;
  RealPairField w() const;
  RealPairField v() const;

 private:
  void nonlinear(const CVec& w_hat, const CVec& v_hat, CVec& nw, CVec& nv);

  WaveParameters params_;
  PeriodicGrid cell_, full_;
  IntegratorOptions options_;
  EtdCoefficients cw_, cv_;
  CVec w_hat_, v_hat_;
  double time_ = 0.0;
  std::size_t steps_ = 0;
  CVec wp_, vp_, tmp_;
};

// The same scheme on a single field u over the whole grid.
class FullFieldIntegrator {
 public:
  FullFieldIntegrator(const WaveParameters& params, const RealPairField& u0, double t0 = 0.0,
                      const IntegratorOptions& options = {});
  void step();
  void advance_to(double t);
  double time() const noexcept { return time_; }
  RealPairField u() const;

 private:
  void nonlinear(const CVec& u_hat, CVec& out);

  WaveParameters params_;
  PeriodicGrid grid_;
  IntegratorOptions options_;
  EtdCoefficients c_;
  CVec u_hat_;
  double time_ = 0.0;
  CVec up_;
};

SimulationState initial_state(const WaveProfile& wave, const ToothData& data, double dt);
SimulationState step(const SimulationState& state, const WaveProfile& wave, const IntegratorOptions& options = {});

struct EvolveOptions {
  double t_end = 10.0;
  std::size_t snapshot_stride = 100;  // integrator steps between stored snapshots
  std::size_t sample_stride = 0;      // steps between observer calls; 0 disables
  double boundary_tol = 1e-3;         // relative to the initial sup of v
  double boundary_fraction = 0.1;
  IntegratorOptions integrator;
  std::function<void(const SimulationState&)> observer;
};

struct Trajectory {
  WaveParameters params;
  std::vector<SimulationState> snapshots;
  std::optional<double> contamination_time;
  std::vector<std::string> warnings;
};

// Sup of |v| over the outer boundary_fraction of cells on each side.
double boundary_level(const RealPairField& v, double fraction);

Trajectory evolve(const WaveProfile& wave, const ToothData& data, const EvolveOptions& options);

}  // namespace lle
