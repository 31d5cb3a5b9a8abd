#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace loopsoup {

// ---- special functions ------------------------------------------------

// regularized lower incomplete gamma P(a,x) and upper Q(a,x) = 1 - P(a,x)
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double gamma_cdf(double x, double shape, double rate);
double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

// survival function of the chi-square distribution
double chi_square_sf(double x, double df);

// Kolmogorov distribution tail Q(t) = 2 sum_k (-1)^{k-1} exp(-2 k^2 t^2)
double kolmogorov_q(double t);

// ---- hypothesis tests ---------------------------------------------------

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  long n = 0;
};

// two-sample Kolmogorov-Smirnov, asymptotic p-value
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// one-sample KS against a cdf
TestResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

// weighted variant: the empirical cdf uses normalized weights and the p-value
// the effective sample size (sum w)^2 / sum w^2
TestResult ks_one_sample_weighted(std::vector<std::pair<double, double>> value_weight,
                                  const std::function<double(double)>& cdf);

// chi-square goodness of fit; expected given as probabilities or raw weights
// (renormalized to the observed total). Cells with small expected count are
// pooled into the last cell.
TestResult chi_square_gof(const std::vector<double>& observed,
                          const std::vector<double>& expected_weights,
                          double min_expected = 5.0);

// two-sample chi-square homogeneity test on count vectors over a shared support
TestResult chi_square_two_sample(const std::vector<double>& counts_a,
                                 const std::vector<double>& counts_b,
                                 double min_expected = 5.0);

// z-test of mean against mean0 (Poisson dispersion companion below)
TestResult mean_z_test(const std::vector<double>& samples, double mean0);

// dispersion test: for Poisson data, (n-1) s^2 / xbar ~ chi^2_{n-1}
TestResult poisson_dispersion(const std::vector<double>& samples, double mean0);

// Pearson correlation with z-test against 0 (Fisher transform)
TestResult correlation_z_test(const std::vector<double>& x, const std::vector<double>& y);

// ---- summaries ----------------------------------------------------------

struct MeanCi {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
  double lo(double z = 2.576) const { return mean - z * se; }
  double hi(double z = 2.576) const { return mean + z * se; }
  bool contains(double v, double z = 3.0) const { return std::abs(v - mean) <= z * se; }
};

MeanCi mean_ci(const std::vector<double>& samples);

struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) { *this = o; return; }
    const double d = o.mean - mean;
    const double tot = static_cast<double>(n) + o.n;
    m2 += o.m2 + d * d * n * o.n / tot;
    mean += d * o.n / tot;
    n += o.n;
  }
  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double se() const { return n > 0 ? std::sqrt(variance() / n) : 0.0; }
};

// total variation distance between two (possibly weighted) empirical pmfs over
// a discrete summary key. Cells whose pooled weight fraction is below
// tail_fraction are merged into one remainder cell before comparing.
template <typename Key>
double tv_distance(const std::map<Key, double>& a, const std::map<Key, double>& b,
                   double tail_fraction = 0.0) {
  double wa = 0.0, wb = 0.0;
  for (auto& [k, v] : a) wa += v;
  for (auto& [k, v] : b) wb += v;
  if (wa <= 0.0 || wb <= 0.0) return 1.0;
  double tv = 0.0, tail_a = 0.0, tail_b = 0.0;
  std::map<Key, double> merged;
  for (auto& [k, v] : a) merged[k] += 0.0;
  for (auto& [k, v] : b) merged[k] += 0.0;
  for (auto& [k, unused] : merged) {
    auto ia = a.find(k);
    auto ib = b.find(k);
    const double pa = ia == a.end() ? 0.0 : ia->second / wa;
    const double pb = ib == b.end() ? 0.0 : ib->second / wb;
    if (pa + pb < tail_fraction) {
      tail_a += pa;
      tail_b += pb;
    } else {
      tv += std::abs(pa - pb);
    }
  }
  tv += std::abs(tail_a - tail_b);
  return 0.5 * tv;
}

}  // namespace loopsoup
