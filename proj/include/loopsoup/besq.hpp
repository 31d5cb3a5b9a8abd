#pragma once

#include <vector>

#include "loopsoup/rng.hpp"

namespace loopsoup {

// Squared Bessel bridges in the walk convention used throughout: the field on
// an edge of length rho is a standard BESQ bridge in the space variable
// (quadratic variation 4 Z ds), matching the gamma(k+1/2, a/2) vertex laws and
// the 1/(2 rho) crossing mass.

// equally spaced grid of m points covering [0, rho]
std::vector<double> uniform_grid(double rho, int m);

// standard scalar Brownian bridge from u to z over [0, T], sampled exactly at
// the given grid positions (grid must start at 0 and end at T)
std::vector<double> sample_scalar_bridge(double u, double z, double T,
                                         const std::vector<double>& grid, Rng& rng);

// value of a scalar Brownian bridge at s given values at s1 < s < s2
double scalar_bridge_insert(double b1, double b2, double s1, double s2, double s, Rng& rng);

// P(scalar Brownian bridge with endpoint values b1, b2 over an interval of
// length h touches 0)
double bb_zero_prob(double b1, double b2, double h);

// cos(angle between pinned endpoints) for the delta-dimensional endpoint
// direction mixture with concentration kappa = sqrt(x y) / T
double direction_cos(int delta, double kappa, Rng& rng);

struct BridgeSample {
  std::vector<double> values;       // field at grid positions
  std::vector<char> interval_zero;  // exact per-interval zero indicator (delta <= 1), else all 0
  bool hits_zero = false;           // any interval flag or grid value equal to 0
};

// exact BESQ^delta bridge from x to y over [0, rho] at grid points.
// Integer delta >= 1 uses the squared-Brownian-bridge representation with the
// exact endpoint-direction mixture; delta == 0 requires y == 0 (absorbed case)
// and uses the tilted Poisson-gamma transition.
BridgeSample besq_bridge(int delta, double x, double y, double rho,
                         const std::vector<double>& grid, Rng& rng);

// one Markov step of the BESQ^0 bridge pinned at 0 after remaining time tau:
// value after h given current value z
double besq0_bridge_step(double z, double h, double tau, Rng& rng);

// BESQ^0 bridge x -> 0 over [0, T] at grid points (monotone-to-absorption not
// assumed; the path may wander before dying). values.back() == 0.
std::vector<double> besq0_bridge_to_zero(double x, double T, const std::vector<double>& grid,
                                         Rng& rng);

// ---- analytic oracles (tests) ---------------------------------------------

double log_bessel_i(double nu, double w);

// log transition density of BESQ^delta over time t from x to z (density in z)
double besq_log_transition(double delta, double t, double x, double z);

// k-th moment of the bridge marginal at time s, by numeric integration of the
// product of transition densities (self-normalizing)
double besq_bridge_marginal_moment(double delta, double x, double y, double T, double s, int k);

// cdf at z of the bridge marginal at time s, numeric
double besq_bridge_marginal_cdf(double delta, double x, double y, double T, double s, double z);

}  // namespace loopsoup
