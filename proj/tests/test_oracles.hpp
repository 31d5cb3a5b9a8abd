#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "loopsoup/besq.hpp"

namespace loopsoup::testing {

// tabulated bridge-marginal cdf: the transition-density product is integrated
// once and interpolated, so KS scans stay cheap
inline std::function<double(double)> bridge_marginal_cdf_table(double delta, double x, double y,
                                                               double T, double s) {
  const double scale = std::max({x, y, delta * T, 1e-3});
  const double zmax = 8.0 * scale + 20.0 * std::sqrt(scale * T);
  const int n = 6000;
  auto grid = std::make_shared<std::vector<double>>(n + 1);
  auto cdf = std::make_shared<std::vector<double>>(n + 1, 0.0);
  const double h = zmax / n;
  double cum = 0.0;
  double prev = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = std::max(i * h, 1e-12);
    (*grid)[i] = i * h;
    const double d = std::exp(besq_log_transition(delta, s, x, z) +
                              besq_log_transition(delta, T - s, z, y));
    const double dd = std::isfinite(d) ? d : 0.0;
    if (i > 0) cum += 0.5 * h * (prev + dd);
    prev = dd;
    (*cdf)[i] = cum;
  }
  const double total = cum;
  return [grid, cdf, total, h, n](double z) {
    if (z <= 0.0) return 0.0;
    if (z >= (*grid)[n]) return 1.0;
    const int i = static_cast<int>(z / h);
    const double frac = (z - (*grid)[i]) / h;
    return ((*cdf)[i] * (1.0 - frac) + (*cdf)[std::min(i + 1, n)] * frac) / total;
  };
}

}  // namespace loopsoup::testing
