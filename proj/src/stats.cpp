#include "loopsoup/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loopsoup {

// series expansion of P(a,x), valid for x < a+1
static double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a,x), valid for x >= a+1
static double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return gamma_p(shape, rate * x);
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * M_SQRT2));
}

double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double kolmogorov_q(double t) {
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("ks_two_sample: degenerate input");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = na * nb / (na + nb);
  const double t = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  return {d, kolmogorov_q(t), static_cast<long>(a.size() + b.size())};
}

TestResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.size() < 2) throw std::invalid_argument("ks_one_sample: degenerate input");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max(d, std::abs(f - i / n));
    d = std::max(d, std::abs((i + 1) / n - f));
  }
  const double t = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  return {d, kolmogorov_q(t), static_cast<long>(a.size())};
}

TestResult ks_one_sample_weighted(std::vector<std::pair<double, double>> vw,
                                  const std::function<double(double)>& cdf) {
  if (vw.size() < 2) throw std::invalid_argument("ks_one_sample_weighted: degenerate input");
  std::sort(vw.begin(), vw.end());
  double wsum = 0.0, wsq = 0.0;
  for (auto& [v, w] : vw) {
    wsum += w;
    wsq += w * w;
  }
  if (wsum <= 0.0) throw std::invalid_argument("ks_one_sample_weighted: zero weight");
  double d = 0.0, cum = 0.0;
  for (auto& [v, w] : vw) {
    const double f = cdf(v);
    d = std::max(d, std::abs(f - cum / wsum));
    cum += w;
    d = std::max(d, std::abs(cum / wsum - f));
  }
  const double ne = wsum * wsum / wsq;
  const double t = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  return {d, kolmogorov_q(t), static_cast<long>(ne)};
}

// pool trailing cells until every expected count reaches min_expected
static void pool_cells(std::vector<double>& obs, std::vector<double>& exp, double min_expected) {
  std::vector<double> o, e;
  double po = 0.0, pe = 0.0;
  for (size_t i = 0; i < obs.size(); ++i) {
    po += obs[i];
    pe += exp[i];
    if (pe >= min_expected) {
      o.push_back(po);
      e.push_back(pe);
      po = pe = 0.0;
    }
  }
  if (pe > 0.0 || po > 0.0) {
    if (!e.empty()) {
      o.back() += po;
      e.back() += pe;
    } else {
      o.push_back(po);
      e.push_back(pe);
    }
  }
  obs = std::move(o);
  exp = std::move(e);
}

TestResult chi_square_gof(const std::vector<double>& observed,
                          const std::vector<double>& expected_weights,
                          double min_expected) {
  if (observed.size() != expected_weights.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: shape mismatch");
  double total = 0.0, wsum = 0.0;
  for (double x : observed) total += x;
  for (double w : expected_weights) wsum += w;
  if (total <= 0.0 || wsum <= 0.0) throw std::invalid_argument("chi_square_gof: empty data");
  std::vector<double> obs = observed, exp(observed.size());
  for (size_t i = 0; i < exp.size(); ++i) exp[i] = expected_weights[i] / wsum * total;
  pool_cells(obs, exp, min_expected);
  if (obs.size() < 2) return {0.0, 1.0, static_cast<long>(total)};
  double stat = 0.0;
  for (size_t i = 0; i < obs.size(); ++i) {
    const double d = obs[i] - exp[i];
    stat += d * d / exp[i];
  }
  const double df = static_cast<double>(obs.size()) - 1.0;
  return {stat, chi_square_sf(stat, df), static_cast<long>(total)};
}

TestResult chi_square_two_sample(const std::vector<double>& counts_a,
                                 const std::vector<double>& counts_b,
                                 double min_expected) {
  if (counts_a.size() != counts_b.size() || counts_a.empty())
    throw std::invalid_argument("chi_square_two_sample: shape mismatch");
  double na = 0.0, nb = 0.0;
  for (double x : counts_a) na += x;
  for (double x : counts_b) nb += x;
  if (na <= 0.0 || nb <= 0.0) throw std::invalid_argument("chi_square_two_sample: empty sample");
  // pool on the combined counts so both vectors share the same cells
  std::vector<double> a, b;
  double pa = 0.0, pb = 0.0;
  for (size_t i = 0; i < counts_a.size(); ++i) {
    pa += counts_a[i];
    pb += counts_b[i];
    const double pooled_exp = (pa + pb) * std::min(na, nb) / (na + nb);
    if (pooled_exp >= min_expected) {
      a.push_back(pa);
      b.push_back(pb);
      pa = pb = 0.0;
    }
  }
  if (pa > 0.0 || pb > 0.0) {
    if (!a.empty()) { a.back() += pa; b.back() += pb; }
    else { a.push_back(pa); b.push_back(pb); }
  }
  if (a.size() < 2) return {0.0, 1.0, static_cast<long>(na + nb)};
  double stat = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double tot = a[i] + b[i];
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    if (ea > 0.0) stat += (a[i] - ea) * (a[i] - ea) / ea;
    if (eb > 0.0) stat += (b[i] - eb) * (b[i] - eb) / eb;
  }
  const double df = static_cast<double>(a.size()) - 1.0;
  return {stat, chi_square_sf(stat, df), static_cast<long>(na + nb)};
}

MeanCi mean_ci(const std::vector<double>& samples) {
  Welford w;
  for (double x : samples) w.add(x);
  return {w.mean, w.se(), w.n};
}

TestResult mean_z_test(const std::vector<double>& samples, double mean0) {
  const MeanCi ci = mean_ci(samples);
  if (ci.n < 2 || ci.se == 0.0) return {0.0, 1.0, ci.n};
  const double z = (ci.mean - mean0) / ci.se;
  return {z, std::erfc(std::abs(z) / M_SQRT2), ci.n};
}

TestResult poisson_dispersion(const std::vector<double>& samples, double mean0) {
  Welford w;
  for (double x : samples) w.add(x);
  if (w.n < 2) return {0.0, 1.0, w.n};
  const double base = mean0 > 0.0 ? mean0 : w.mean;
  if (base <= 0.0) return {0.0, 1.0, w.n};
  const double stat = (w.n - 1) * w.variance() / base;
  const double df = static_cast<double>(w.n - 1);
  // two-sided via normal approximation of chi^2
  const double z = (stat - df) / std::sqrt(2.0 * df);
  return {z, std::erfc(std::abs(z) / M_SQRT2), w.n};
}

TestResult correlation_z_test(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 8)
    throw std::invalid_argument("correlation_z_test: bad input");
  const long n = static_cast<long>(x.size());
  double mx = 0.0, my = 0.0;
  for (long i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (long i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return {0.0, 1.0, n};
  const double r = sxy / std::sqrt(sxx * syy);
  const double z = 0.5 * std::log((1.0 + r) / (1.0 - r)) * std::sqrt(static_cast<double>(n - 3));
  return {r, std::erfc(std::abs(z) / M_SQRT2), n};
}

}  // namespace loopsoup
