#pragma once

#include <vector>

#include "loopsoup/rng.hpp"

namespace loopsoup {

// Trace of a one-dimensional loop soup on [0, rho] conditioned on endpoint
// local times. Crossing counts are even for the plain soup and odd once the
// extra crossing is added.
struct OneDimTrace {
  double rho = 0.0;
  double ell1 = 0.0, ell2 = 0.0;
  int crossings = 0;
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<char> interval_zero;
  bool hits_zero = false;

  // T = int_0^rho ds / field; +inf when the field vanishes
  double time_change_T() const;
};

// crossing-count mixture: P(n) prop. to beta^n / n! over even (odd) integers,
// beta = sqrt(ell1 ell2) / rho
int sample_crossing_count(double beta, bool odd, Rng& rng);
std::vector<double> crossing_count_pmf(double beta, bool odd, int nmax);

OneDimTrace sample_B(double rho, double ell1, double ell2, const std::vector<double>& grid,
                     Rng& rng);
OneDimTrace sample_C(double rho, double ell1, double ell2, const std::vector<double>& grid,
                     Rng& rng);

// conditioned on a positive field (rejection on the crossing-free zero coin)
OneDimTrace sample_B_positive(double rho, double ell1, double ell2,
                              const std::vector<double>& grid, Rng& rng);

// ---- killed Kingman coalescent ----------------------------------------------

// block count at time T of the chain where each pair merges at rate 4 and each
// block dies at rate kill_rate; started from n0 singletons (large n0 stands in
// for the entrance from infinity)
long kingman_killed(double T, double kill_rate, long n0, Rng& rng);

// ---- mu-process cross-check --------------------------------------------------

// Euler simulation of the mu-process with mu = 2 read on the window [0, rho],
// stopped at local time ell1 at position 0. Used only as a law cross-check.
struct MuProcessTrace {
  int crossings = 0;
  double local_time_at_0 = 0.0;
  double local_time_at_rho = 0.0;
  bool completed = true;  // the stopping time has a stable-1/2 tail; paths
                          // exceeding the step budget are discarded upstream
};
MuProcessTrace mu_process_trace(double rho, double ell1, long steps, Rng& rng,
                                long max_steps = 5000000);

}  // namespace loopsoup
