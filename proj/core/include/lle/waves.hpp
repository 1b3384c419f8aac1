#pragma once

#include <vector>

#include "lle/grid.hpp"
#include "lle/parameters.hpp"

namespace lle {

struct ConstantState {
  double rho = 0.0;  // |u_*|^2
  cd value;
};

std::vector<ConstantState> homogeneous_states(const WaveParameters& params);

struct NewtonOptions {
  double tolerance = 1e-11;
  int max_iterations = 40;
  double min_rcond = 1e-14;
};

struct NewtonReport {
  int iterations = 0;
  double rcond = 1.0;
  double phase_multiplier = 0.0;  // Lagrange multiplier of the phase condition
  bool bordered = false;
};

struct WaveProfile {
  WaveParameters params;
  RealPairField profile;
  RealPairField derivative;
  RealPairField second_derivative;
  double residual_norm = 0.0;
  NewtonReport newton;

  bool is_nonconstant(double tol = 1e-8) const;
  const PeriodicGrid& grid() const { return profile.grid(); }
  static WaveProfile from_samples(const WaveParameters& params, const RealPairField& profile);
};

// Bordered Newton solve of the stationary equation with the phase condition <guess', u - guess> = 0.
WaveProfile newton_wave(const RealPairField& guess, const WaveParameters& params,
                        const NewtonOptions& options = {});

struct ContinuationOptions {
  NewtonOptions newton;
  double fold_rcond = 1e-10;
};

// Natural-parameter continuation in F with a tangent predictor.
WaveProfile continuation(const WaveProfile& start, double target_forcing, int steps,
                         const ContinuationOptions& options = {});

// Constant state of largest |u_*|^2 plus amplitude * (cos(2 pi x / T), 0).
RealPairField turing_seed(const WaveParameters& params, std::size_t points, double amplitude);

// Newton from a list of seed amplitudes; returns the first nonconstant wave found.
WaveProfile construct_wave(const WaveParameters& params, std::size_t points,
                           const std::vector<double>& seed_amplitudes);

}  // namespace lle
