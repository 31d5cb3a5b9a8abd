#include "loopsoup/one_dim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "loopsoup/besq.hpp"
#include "loopsoup/occupation.hpp"

namespace loopsoup {

double OneDimTrace::time_change_T() const {
  for (double v : values)
    if (v < 1e-12) return std::numeric_limits<double>::infinity();
  if (hits_zero) return std::numeric_limits<double>::infinity();
  double t = 0.0;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double h = grid[i + 1] - grid[i];
    t += 0.5 * h * (1.0 / values[i] + 1.0 / values[i + 1]);
  }
  return t;
}

std::vector<double> crossing_count_pmf(double beta, bool odd, int nmax) {
  std::vector<double> pmf(nmax + 1, 0.0);
  const double norm = odd ? std::sinh(beta) : std::cosh(beta);
  double term = 1.0;  // beta^n / n!
  for (int n = 0; n <= nmax; ++n) {
    if ((n % 2 == 1) == odd) pmf[n] = norm > 0.0 ? term / norm : (n == (odd ? 1 : 0) ? 1.0 : 0.0);
    term *= beta / (n + 1);
  }
  return pmf;
}

int sample_crossing_count(double beta, bool odd, Rng& rng) {
  if (beta <= 0.0) return odd ? 1 : 0;
  const double norm = odd ? std::sinh(beta) : std::cosh(beta);
  double u = rng.uniform() * norm;
  double term = odd ? beta : 1.0;  // beta^n / n! at the first admissible n
  int n = odd ? 1 : 0;
  for (;;) {
    u -= term;
    if (u <= 0.0) return n;
    term *= beta * beta / ((n + 1.0) * (n + 2.0));
    n += 2;
    if (n > 100000) throw std::runtime_error("sample_crossing_count: runaway tail");
  }
}

namespace {

OneDimTrace assemble(double rho, double ell1, double ell2, int crossings,
                     const std::vector<double>& grid, Rng& rng) {
  OneDimTrace t;
  t.rho = rho;
  t.ell1 = ell1;
  t.ell2 = ell2;
  t.crossings = crossings;
  t.grid = grid;
  EdgeField f = sample_edge_field(ell1, ell2, rho, crossings, false, grid, rng);
  t.values = std::move(f.values);
  t.interval_zero = std::move(f.interval_zero);
  t.hits_zero = f.zero_hit;
  return t;
}

}  // namespace

OneDimTrace sample_B(double rho, double ell1, double ell2, const std::vector<double>& grid,
                     Rng& rng) {
  const double beta = std::sqrt(ell1 * ell2) / rho;
  return assemble(rho, ell1, ell2, sample_crossing_count(beta, false, rng), grid, rng);
}

OneDimTrace sample_C(double rho, double ell1, double ell2, const std::vector<double>& grid,
                     Rng& rng) {
  const double beta = std::sqrt(ell1 * ell2) / rho;
  return assemble(rho, ell1, ell2, sample_crossing_count(beta, true, rng), grid, rng);
}

OneDimTrace sample_B_positive(double rho, double ell1, double ell2,
                              const std::vector<double>& grid, Rng& rng) {
  if (ell1 <= 0.0 || ell2 <= 0.0)
    throw std::invalid_argument("sample_B_positive: needs positive endpoint times");
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    OneDimTrace t = sample_B(rho, ell1, ell2, grid, rng);
    if (!t.hits_zero) return t;
  }
  throw std::runtime_error("sample_B_positive: rejection budget exceeded");
}

long kingman_killed(double T, double kill_rate, long n0, Rng& rng) {
  if (T <= 0.0) throw std::invalid_argument("kingman_killed: T <= 0");
  if (std::isinf(T)) return 0;
  long n = n0;
  double t = 0.0;
  while (n > 0) {
    const double rate = 2.0 * static_cast<double>(n) * (n - 1) + kill_rate * n;
    t += rng.exponential(rate);
    if (t > T) break;
    --n;
  }
  return n;
}

MuProcessTrace mu_process_trace(double rho, double ell1, long steps, Rng& rng,
                                long max_steps) {
  MuProcessTrace out;
  const double dt = rho / static_cast<double>(steps);
  const double sd = std::sqrt(dt);

  // Band-transition counter shared by both time directions. The infimum
  // level sweeps monotonically down through the window once, contributing a
  // single non-loop alternation; every other alternation is a loop crossing.
  int alternations = 0;
  int last_level = -1;  // 0 or 1 once a level has been touched
  auto track = [&](double x) {
    const int level = x <= 0.0 ? 0 : (x >= rho ? 1 : -1);
    if (level < 0) return;
    if (last_level >= 0 && level != last_level) ++alternations;
    last_level = level;
  };
  auto tanaka = [](double x_old, double x_new, double level, double& acc) {
    const double s = x_old - level >= 0.0 ? 1.0 : -1.0;
    acc += std::abs(x_new - level) - std::abs(x_old - level) - s * (x_new - x_old);
  };

  // backward half: |B| + 2 L, simulated until its future infimum clears rho
  {
    double b = 0.0, lt = 0.0, x = 0.0;
    std::vector<double> path;
    path.push_back(x);
    while (2.0 * lt <= rho) {
      const double b_new = b + sd * rng.normal();
      tanaka(b, b_new, 0.0, lt);
      b = b_new;
      x = std::abs(b) + 2.0 * lt;
      path.push_back(x);
      if (static_cast<long>(path.size()) > max_steps) {
        out.completed = false;
        return out;
      }
    }
    // read in forward time order
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      track(*it);
      if (it + 1 != path.rend()) tanaka(*it, *(it + 1), rho, out.local_time_at_rho);
    }
  }
  // forward half: |B| - 2 L, stopped at local time ell1 of X at level 0
  {
    double b = 0.0, lt = 0.0;
    double x = 0.0, l0 = 0.0;
    long iter = 0;
    while (l0 < ell1) {
      const double b_new = b + sd * rng.normal();
      tanaka(b, b_new, 0.0, lt);
      const double x_new = std::abs(b_new) - 2.0 * lt;
      tanaka(x, x_new, 0.0, l0);
      tanaka(x, x_new, rho, out.local_time_at_rho);
      b = b_new;
      x = x_new;
      track(x);
      if (++iter > max_steps) {
        out.completed = false;
        break;
      }
    }
    out.local_time_at_0 = l0;
  }
  out.crossings = std::max(0, alternations - 1);
  return out;
}

}  // namespace loopsoup
