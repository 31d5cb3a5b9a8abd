#include "loopsoup/rng.hpp"

#include <stdexcept>

namespace loopsoup {

double Rng::gamma(double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0) throw std::invalid_argument("gamma: bad parameters");
  // Marsaglia & Tsang; shape < 1 handled by the boosting identity
  double boost = 1.0;
  double s = shape;
  if (s < 1.0) {
    boost = std::pow(uniform(), 1.0 / s);
    s += 1.0;
  }
  const double d = s - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
  }
}

long Rng::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0.0) return 0;
  if (mean > 30.0) {
    // exact split keeps the multiplication method in its comfortable range
    const double half = 0.5 * mean;
    return poisson(half) + poisson(mean - half);
  }
  const double limit = std::exp(-mean);
  long k = 0;
  double prod = uniform();
  while (prod > limit) {
    ++k;
    prod *= uniform();
  }
  return k;
}

double Rng::truncated_gamma_below(double shape, double rate, double cap) {
  if (cap <= 0.0) throw std::invalid_argument("truncated_gamma_below: cap <= 0");
  // proposal x = cap * U^{1/shape} has density prop. to x^{shape-1} on (0,cap);
  // accept with the remaining e^{-rate x} factor
  for (;;) {
    const double x = cap * std::pow(uniform(), 1.0 / shape);
    if (uniform() < std::exp(-rate * x)) return x;
  }
}

double Rng::truncated_gamma_window(double shape, double rate, double lo, double hi) {
  if (!(lo < hi) || hi <= 0.0) throw std::invalid_argument("truncated_gamma_window: bad window");
  lo = std::max(lo, 0.0);
  if (lo <= 0.0 && shape < 1.0)
    throw std::invalid_argument("truncated_gamma_window: density unbounded at 0");
  // uniform proposal with exact density ratio; windows used here are narrow
  auto logf = [&](double x) { return (shape - 1.0) * std::log(x) + -rate * x; };
  double mode = (shape - 1.0) / rate;
  double peak;
  if (mode <= lo) peak = logf(lo);
  else if (mode >= hi) peak = logf(hi);
  else peak = logf(mode);
  for (;;) {
    const double x = uniform(lo, hi);
    if (std::log(uniform()) < logf(x) - peak) return x;
  }
}

}  // namespace loopsoup
