#pragma once

#include <random>
#include <vector>

#include "loopforge/looprep.hpp"

namespace loopforge {

// Process values on the uniform grid 0, dt, 2dt, ..., 1 of [0,1].
struct GridPath {
  double dt = 0.0;
  std::vector<double> v;

  int steps() const { return static_cast<int>(v.size()) - 1; }
  // Linear interpolation at time t.
  double at(double t) const;
  // Trapezoid integral over [0,1].
  double integral() const;
};

// Validates dt = 1/n for integer n >= 100 and returns n.
int grid_steps(double dt);

// Exact sequential Gaussian bridge from a to b on [0,1].
GridPath sample_bridge(double a, double b, double dt, std::mt19937_64& rng);

// Brownian bridge conditioned to stay positive: rejection on positive grid
// values plus an independent per-segment no-zero-crossing coin with success
// probability 1 - exp(-2 x_i x_{i+1} / dt), which accounts for excursions
// below 0 between grid points.  `attempts`, when given, receives the number
// of bridge draws consumed (for acceptance-rate checks).
GridPath condition_positive(double a, double b, double dt, std::mt19937_64& rng,
                            long long* attempts = nullptr);

// Reflected-Brownian-motion bridge from a to b: sign of the far endpoint
// drawn with same-sign probability e^{ab}/(e^{ab}+e^{-ab}), then |bridge|.
GridPath sample_reflected_bridge(double a, double b, double dt, std::mt19937_64& rng);

// Zero-dimensional squared Bessel process started from x0, sampled exactly
// per grid step via its compound-Poisson-of-Gamma transition; absorbed at 0.
GridPath sample_besq0(double x0, double dt, std::mt19937_64& rng);

// sample_besq0 conditioned (by rejection) to be absorbed strictly before the
// end of the grid.
GridPath sample_besq0_absorbed(double x0, double dt, std::mt19937_64& rng,
                               long long* attempts = nullptr);

// Squared Bessel bridge of integer dimension d from 0 to 0 on [0,1], realized
// as the sum of d independent squared standard Brownian bridges.
GridPath sample_squared_bessel_bridge(int dim, double dt, std::mt19937_64& rng);

// The three-part decomposition: squared path = besq0(a^2) absorbed before 1
// + time-reversed besq0(b^2) absorbed before 1 + squared Bessel bridge of
// dimension 1 + 2*Delta, Delta ~ Poisson(a b C) conditioned to the given
// parity; returns the square root.  C = 1 is the unit-interval normalization.
GridPath sample_cpy_rhs(double a, double b, double dt, Parity parity, double C,
                        std::mt19937_64& rng);

}  // namespace loopforge
