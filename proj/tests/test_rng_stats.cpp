#include <doctest.h>

#include <cmath>

#include "loopsoup/rng.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("stream independence and determinism") {
  Rng a(1, 2, 3), b(1, 2, 3), c(1, 2, 4);
  CHECK(a() == b());
  CHECK(a() != c());
}

TEST_CASE("distribution moments") {
  Rng rng(11, 1, 0);
  const int n = 40000;
  Welford normal, gamma23, pois;
  for (int i = 0; i < n; ++i) {
    normal.add(rng.normal());
    gamma23.add(rng.gamma(2.0, 3.0));
    pois.add(static_cast<double>(rng.poisson(4.5)));
  }
  CHECK(std::abs(normal.mean) < 4.0 / std::sqrt(n));
  CHECK(normal.variance() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(gamma23.mean == doctest::Approx(2.0 / 3.0).epsilon(0.03));
  CHECK(gamma23.variance() == doctest::Approx(2.0 / 9.0).epsilon(0.08));
  CHECK(pois.mean == doctest::Approx(4.5).epsilon(0.03));
  CHECK(pois.variance() == doctest::Approx(4.5).epsilon(0.08));
  // large-mean splitting stays exact in distribution
  Welford big;
  for (int i = 0; i < 20000; ++i) big.add(static_cast<double>(rng.poisson(90.0)));
  CHECK(big.mean == doctest::Approx(90.0).epsilon(0.01));
  CHECK(big.variance() == doctest::Approx(90.0).epsilon(0.08));
}

TEST_CASE("beta edge cases and the truncated gammas") {
  Rng rng(12, 1, 0);
  CHECK(rng.beta(0.5, 0.0) == 1.0);
  CHECK(rng.beta(0.0, 0.5) == 0.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.truncated_gamma_below(0.5, 1.0, 0.2);
    CHECK(x > 0.0);
    CHECK(x <= 0.2);
    const double y = rng.truncated_gamma_window(1.5, 1.0, 0.75, 0.85);
    CHECK(y >= 0.75);
    CHECK(y <= 0.85);
  }
}

TEST_CASE("special functions") {
  CHECK(gamma_p(0.5, 1e9) == doctest::Approx(1.0));
  CHECK(gamma_q(2.0, 0.0) == doctest::Approx(1.0));
  CHECK(chi_square_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(chi_square_sf(18.307038053275146, 10.0) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(gamma_cdf(1.0, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(kolmogorov_q(0.5) > 0.95);
  CHECK(kolmogorov_q(2.0) < 0.001);
}

TEST_CASE("hypothesis tests behave under the null") {
  Rng rng(13, 1, 0);
  std::vector<double> a, b;
  for (int i = 0; i < 4000; ++i) {
    a.push_back(rng.normal());
    b.push_back(rng.normal());
  }
  CHECK(ks_two_sample(a, b).p_value > 1e-4);
  CHECK(ks_one_sample(a, [](double x) { return normal_cdf(x); }).p_value > 1e-4);
  // weighted variant with unit weights reduces to the plain one
  std::vector<std::pair<double, double>> vw;
  for (double x : a) vw.emplace_back(x, 1.0);
  const TestResult w = ks_one_sample_weighted(vw, [](double x) { return normal_cdf(x); });
  const TestResult p = ks_one_sample(a, [](double x) { return normal_cdf(x); });
  CHECK(w.statistic == doctest::Approx(p.statistic));

  std::vector<double> pois;
  for (int i = 0; i < 4000; ++i) pois.push_back(static_cast<double>(rng.poisson(1.0)));
  CHECK(poisson_dispersion(pois, 1.0).p_value > 1e-4);
  CHECK(mean_z_test(pois, 1.0).p_value > 1e-4);

  // chi-square under the null and against a wrong model
  std::vector<double> obs(6, 0.0);
  for (int i = 0; i < 6000; ++i) obs[rng.uniform_index(6)] += 1.0;
  CHECK(chi_square_gof(obs, std::vector<double>(6, 1.0)).p_value > 1e-4);
  CHECK(chi_square_gof(obs, {10, 1, 1, 1, 1, 1}).p_value < 1e-6);
}

TEST_CASE("tv distance") {
  std::map<std::string, double> a{{"x", 50.0}, {"y", 50.0}};
  std::map<std::string, double> b{{"x", 75.0}, {"y", 25.0}};
  CHECK(tv_distance(a, b) == doctest::Approx(0.25));
  CHECK(tv_distance(a, a) == doctest::Approx(0.0));
}
