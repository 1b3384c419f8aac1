#pragma once

namespace lle {

// Smooth monotone step: 0 for s <= 0, 1 for s >= 1, built from exp(-1/s).
double smooth_step(double s);
double smooth_step_derivative(double s);

// chi(t) = 0 on [0, 1], 1 on [2, inf).
double temporal_cutoff(double t);
double temporal_cutoff_derivative(double t);

// 1 for |xi| <= xi0 / 2, 0 for |xi| >= xi0.
double frequency_cutoff(double xi, double xi0);

}  // namespace lle
