#include <doctest.h>

#include <cmath>

#include "loopsoup/besq.hpp"
#include "loopsoup/stats.hpp"

#include "test_oracles.hpp"

using namespace loopsoup;

TEST_CASE("bridge endpoints are pinned") {
  Rng rng(1, 99, 0);
  for (int delta : {0, 1, 2, 3, 4}) {
    const double x = delta == 0 ? 1.3 : 1.3;
    const double y = delta == 0 ? 0.0 : 0.6;
    const BridgeSample s = besq_bridge(delta, x, y, 2.0, uniform_grid(2.0, 9), rng);
    CHECK(s.values.front() == doctest::Approx(x));
    CHECK(s.values.back() == doctest::Approx(y));
  }
  // two-point grid returns the endpoints exactly
  const BridgeSample two = besq_bridge(3, 0.4, 0.9, 1.0, uniform_grid(1.0, 2), rng);
  CHECK(two.values == std::vector<double>{0.4, 0.9});
}

TEST_CASE("dimension two bridge from zero is interior positive") {
  Rng rng(2, 99, 0);
  for (int i = 0; i < 500; ++i) {
    const BridgeSample s = besq_bridge(2, 0.0, 0.0, 1.0, uniform_grid(1.0, 3), rng);
    CHECK(s.values[1] > 0.0);
  }
}

TEST_CASE("log bessel i reference values") {
  CHECK(log_bessel_i(0.0, 1.0) == doctest::Approx(std::log(1.2660658777520084)).epsilon(1e-10));
  CHECK(log_bessel_i(1.0, 2.0) == doctest::Approx(std::log(1.5906368546373291)).epsilon(1e-10));
  CHECK(log_bessel_i(0.5, 3.0) ==
        doctest::Approx(std::log(std::sinh(3.0) * std::sqrt(2.0 / (M_PI * 3.0)))).epsilon(1e-9));
  // large-argument asymptotic regime
  CHECK(log_bessel_i(1.0, 500.0) ==
        doctest::Approx(500.0 - 0.5 * std::log(2.0 * M_PI * 500.0) +
                        std::log(1.0 - 3.0 / (8.0 * 500.0) - 15.0 / (128.0 * 250000.0)))
            .epsilon(1e-6));
}

TEST_CASE("bridge marginals match the transition-density oracle") {
  // exercises the endpoint-direction mixtures for each dimension family
  struct Case { int delta; double x, y; };
  for (const Case c : {Case{1, 1.0, 0.8}, Case{2, 1.3, 0.7}, Case{3, 1.0, 2.0}, Case{5, 0.5, 1.5}}) {
    std::vector<double> mids;
    const auto grid = uniform_grid(1.0, 3);
    for (int i = 0; i < 6000; ++i) {
      Rng rng(40 + c.delta, 99, i);
      mids.push_back(besq_bridge(c.delta, c.x, c.y, 1.0, grid, rng).values[1]);
    }
    const TestResult t =
        ks_one_sample(mids, testing::bridge_marginal_cdf_table(c.delta, c.x, c.y, 1.0, 0.5));
    INFO("delta=", c.delta, " p=", t.p_value);
    CHECK(t.p_value > 1e-4);
    // numeric mean oracle
    double mean = 0.0;
    for (double m : mids) mean += m;
    mean /= mids.size();
    const double target = besq_bridge_marginal_moment(c.delta, c.x, c.y, 1.0, 0.5, 1);
    CHECK(std::abs(mean - target) < 4.0 * std::sqrt(target) / std::sqrt(6000.0) * 2.0);
  }
}

TEST_CASE("bridge additivity in law") {
  // dim-1 (a->b) plus dim-2 (0->0) equals dim-3 (a->b) at the midpoint
  const auto grid = uniform_grid(1.0, 3);
  std::vector<double> sum, direct;
  for (int i = 0; i < 8000; ++i) {
    Rng rng(71, 99, i);
    const double s1 = besq_bridge(1, 0.9, 1.4, 1.0, grid, rng).values[1];
    const double s2 = besq_bridge(2, 0.0, 0.0, 1.0, grid, rng).values[1];
    sum.push_back(s1 + s2);
    Rng rng2(72, 99, i);
    direct.push_back(besq_bridge(3, 0.9, 1.4, 1.0, grid, rng2).values[1]);
  }
  const TestResult t = ks_two_sample(sum, direct);
  CHECK(t.p_value > 1e-4);
}

TEST_CASE("besq0 bridge dies and stays dead") {
  Rng rng(5, 99, 0);
  const auto grid = uniform_grid(1.0, 17);
  for (int i = 0; i < 300; ++i) {
    const std::vector<double> v = besq0_bridge_to_zero(1.0, 1.0, grid, rng);
    CHECK(v.back() == 0.0);
    bool dead = false;
    for (double z : v) {
      if (dead) CHECK(z == 0.0);
      if (z == 0.0) dead = true;
    }
  }
}

TEST_CASE("scalar bridge zero probability") {
  CHECK(bb_zero_prob(1.0, 1.0, 1.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(bb_zero_prob(1.0, -0.5, 1.0) == 1.0);
  CHECK(bb_zero_prob(0.0, 1.0, 1.0) == 1.0);
}
