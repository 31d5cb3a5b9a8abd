#include "loopsoup/besq.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace loopsoup {

std::vector<double> uniform_grid(double rho, int m) {
  if (m < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  std::vector<double> g(m);
  for (int i = 0; i < m; ++i) g[i] = rho * i / (m - 1);
  g.back() = rho;
  return g;
}

std::vector<double> sample_scalar_bridge(double u, double z, double T,
                                         const std::vector<double>& grid, Rng& rng) {
  const int m = static_cast<int>(grid.size());
  std::vector<double> b(m);
  b[0] = u;
  b[m - 1] = z;
  for (int i = 1; i + 1 < m; ++i) {
    const double h = grid[i] - grid[i - 1];
    const double tau = T - grid[i - 1];
    const double mean = b[i - 1] + (z - b[i - 1]) * h / tau;
    const double var = h * (tau - h) / tau;
    b[i] = rng.normal(mean, std::sqrt(std::max(var, 0.0)));
  }
  return b;
}

double scalar_bridge_insert(double b1, double b2, double s1, double s2, double s, Rng& rng) {
  const double len = s2 - s1;
  const double frac = (s - s1) / len;
  const double mean = b1 + frac * (b2 - b1);
  const double var = (s - s1) * (s2 - s) / len;
  return rng.normal(mean, std::sqrt(std::max(var, 0.0)));
}

double bb_zero_prob(double b1, double b2, double h) {
  if (b1 == 0.0 || b2 == 0.0) return 1.0;
  if ((b1 > 0.0) != (b2 > 0.0)) return 1.0;
  return std::exp(-2.0 * std::abs(b1 * b2) / h);
}

double direction_cos(int delta, double kappa, Rng& rng) {
  if (delta == 1) {
    // two endpoints, weights e^{+-kappa}
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * kappa));
    return rng.bernoulli(p_plus) ? 1.0 : -1.0;
  }
  // Wood's von Mises-Fisher envelope for density e^{kappa t} (1-t^2)^{(delta-3)/2};
  // acceptance stays bounded away from zero for every (delta, kappa)
  const double m1 = static_cast<double>(delta - 1);
  const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1)) / m1;
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);
  for (int guard = 0; guard < 1000000; ++guard) {
    const double z = rng.beta(0.5 * m1, 0.5 * m1);
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform();
    if (kappa * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) return w;
  }
  throw std::runtime_error("direction_cos: rejection budget exceeded");
}

double besq0_bridge_step(double z, double h, double tau, Rng& rng) {
  if (z <= 0.0) return 0.0;
  if (tau <= h * (1.0 + 1e-12)) return 0.0;  // final pin
  // free transition tilted by the absorption-by-tau constraint: Poisson count
  // shrinks by lambda/(lambda+theta) and the gamma rate stiffens to lambda+theta
  const double lambda = 1.0 / (2.0 * h);
  const double theta = 1.0 / (2.0 * (tau - h));
  const long count = rng.poisson((z / (2.0 * h)) * lambda / (lambda + theta));
  if (count == 0) return 0.0;
  return rng.gamma(static_cast<double>(count), lambda + theta);
}

std::vector<double> besq0_bridge_to_zero(double x, double T, const std::vector<double>& grid,
                                         Rng& rng) {
  const int m = static_cast<int>(grid.size());
  std::vector<double> v(m);
  v[0] = x;
  for (int i = 1; i < m; ++i) {
    const double h = grid[i] - grid[i - 1];
    const double tau = T - grid[i - 1];
    v[i] = besq0_bridge_step(v[i - 1], h, tau, rng);
  }
  v[m - 1] = 0.0;
  return v;
}

BridgeSample besq_bridge(int delta, double x, double y, double rho,
                         const std::vector<double>& grid, Rng& rng) {
  if (x < 0.0 || y < 0.0 || rho <= 0.0) throw std::invalid_argument("besq_bridge: bad endpoints");
  if (grid.size() < 2 || grid.front() != 0.0 || std::abs(grid.back() - rho) > 1e-12 * std::max(1.0, rho))
    throw std::invalid_argument("besq_bridge: grid must span [0, rho]");
  const int m = static_cast<int>(grid.size());
  BridgeSample out;
  out.values.assign(m, 0.0);
  out.interval_zero.assign(m - 1, 0);

  if (delta == 0) {
    if (x == 0.0 && y == 0.0) {
      out.hits_zero = true;
      std::fill(out.interval_zero.begin(), out.interval_zero.end(), 1);
      return out;
    }
    if (y != 0.0) throw std::invalid_argument("besq_bridge: delta 0 supported only with y == 0");
    out.values = besq0_bridge_to_zero(x, rho, grid, rng);
    for (int i = 0; i + 1 < m; ++i)
      out.interval_zero[i] = out.values[i] == 0.0 || out.values[i + 1] == 0.0;
    out.hits_zero = true;
    return out;
  }
  if (delta < 0) throw std::invalid_argument("besq_bridge: negative dimension");

  // endpoint vectors: u along e1, z in the (e1, e2) plane
  const double ru = std::sqrt(x);
  const double rz = std::sqrt(y);
  double t = 1.0;
  if (x > 0.0 && y > 0.0 && delta >= 1) t = direction_cos(delta, ru * rz / rho, rng);
  std::vector<double> u(delta, 0.0), z(delta, 0.0);
  u[0] = ru;
  z[0] = rz * t;
  if (delta >= 2) z[1] = rz * std::sqrt(std::max(0.0, 1.0 - t * t));

  std::vector<std::vector<double>> comp(delta);
  for (int d = 0; d < delta; ++d) comp[d] = sample_scalar_bridge(u[d], z[d], rho, grid, rng);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int d = 0; d < delta; ++d) s += comp[d][i] * comp[d][i];
    out.values[i] = s;
  }
  if (delta == 1) {
    for (int i = 0; i + 1 < m; ++i) {
      const double h = grid[i + 1] - grid[i];
      const double p = bb_zero_prob(comp[0][i], comp[0][i + 1], h);
      out.interval_zero[i] = (p >= 1.0) || rng.bernoulli(p);
      if (out.interval_zero[i]) out.hits_zero = true;
    }
  }
  for (double v : out.values)
    if (v == 0.0) out.hits_zero = true;
  return out;
}

// ---- analytic oracles ------------------------------------------------------

double log_bessel_i(double nu, double w) {
  if (w <= 0.0) return nu == 0.0 ? 0.0 : -INFINITY;
  if (w > 300.0) {
    // uniform asymptotic expansion, first correction terms
    const double mu = 4.0 * nu * nu;
    double corr = 1.0 - (mu - 1.0) / (8.0 * w) + (mu - 1.0) * (mu - 9.0) / (128.0 * w * w);
    return w - 0.5 * std::log(2.0 * M_PI * w) + std::log(std::max(corr, 1e-300));
  }
  // series in log space with running-max shift
  const double lw = std::log(0.5 * w);
  double max_term = -INFINITY;
  std::vector<double> terms;
  for (int k = 0; k < 4000; ++k) {
    const double lt = (2.0 * k + nu) * lw - std::lgamma(k + 1.0) - std::lgamma(k + nu + 1.0);
    terms.push_back(lt);
    max_term = std::max(max_term, lt);
    if (k > 4 && lt < max_term - 45.0) break;
  }
  double sum = 0.0;
  for (double lt : terms) sum += std::exp(lt - max_term);
  return max_term + std::log(sum);
}

double besq_log_transition(double delta, double t, double x, double z) {
  if (t <= 0.0 || z < 0.0) throw std::invalid_argument("besq_log_transition: bad arguments");
  if (x <= 0.0) {
    // gamma(delta/2, 1/(2t)) density
    const double shape = 0.5 * delta;
    const double rate = 1.0 / (2.0 * t);
    if (z <= 0.0) return -INFINITY;
    return shape * std::log(rate) + (shape - 1.0) * std::log(z) - rate * z - std::lgamma(shape);
  }
  if (z <= 0.0) return -INFINITY;
  const double nu = 0.5 * delta - 1.0;
  return -std::log(2.0 * t) + 0.5 * nu * (std::log(z) - std::log(x)) - (x + z) / (2.0 * t) +
         log_bessel_i(nu, std::sqrt(x * z) / t);
}

// Simpson integration of g(z) * (bridge marginal density) over a generous range
static double bridge_marginal_integral(double delta, double x, double y, double T, double s,
                                       const std::function<double(double)>& g) {
  const double scale = std::max({x, y, delta * T, 1e-3});
  const double zmax = 8.0 * scale + 20.0 * std::sqrt(scale * T);
  const int n = 8192;  // even
  const double h = zmax / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = std::max(i * h, 1e-12);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double ld = besq_log_transition(delta, s, x, z) + besq_log_transition(delta, T - s, z, y);
    const double d = std::exp(ld);
    if (!std::isfinite(d)) continue;
    num += w * g(z) * d;
    den += w * d;
  }
  return num / den;
}

double besq_bridge_marginal_moment(double delta, double x, double y, double T, double s, int k) {
  return bridge_marginal_integral(delta, x, y, T, s,
                                  [k](double z) { return std::pow(z, k); });
}

double besq_bridge_marginal_cdf(double delta, double x, double y, double T, double s, double z0) {
  return bridge_marginal_integral(delta, x, y, T, s,
                                  [z0](double z) { return z <= z0 ? 1.0 : 0.0; });
}

}  // namespace loopsoup
