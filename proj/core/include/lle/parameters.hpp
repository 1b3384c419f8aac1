#pragma once

namespace lle {

// Detuning alpha, dispersion sign beta, forcing F and the wave period T.
struct WaveParameters {
  double alpha = 1.0;
  int beta = -1;
  double forcing = 1.1;
  double period = 0.0;

  // F = 0 is admitted for the homogeneous zero state.
  void validate() const;
  bool operator==(const WaveParameters&) const = default;
};

// Period of the critical Turing mode q_c^2 = (2 - alpha) / (-beta) of the rho = 1 state.
double turing_period(double alpha, int beta);

}  // namespace lle
