#include <doctest.h>

#include <cmath>

#include "loopsoup/besq.hpp"
#include "loopsoup/one_dim.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("crossing parities and degenerate endpoints") {
  const auto grid = uniform_grid(1.0, 9);
  for (int i = 0; i < 300; ++i) {
    Rng rng(1, stream::kOneDim, i);
    const OneDimTrace b = sample_B(1.0, 1.2, 0.7, grid, rng);
    CHECK(b.crossings % 2 == 0);
    CHECK(b.values.front() == doctest::Approx(1.2));
    CHECK(b.values.back() == doctest::Approx(0.7));
    const OneDimTrace c = sample_C(1.0, 1.2, 0.7, grid, rng);
    CHECK(c.crossings % 2 == 1);
  }
  Rng rng(2, stream::kOneDim, 0);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_B(1.0, 0.0, 0.0, grid, rng).crossings == 0);
    CHECK(sample_C(1.0, 0.0, 0.0, grid, rng).crossings == 1);
    CHECK(sample_B(1.0, 0.0, 1.0, grid, rng).crossings == 0);
  }
}

TEST_CASE("crossing count pmf") {
  const std::vector<double> even = crossing_count_pmf(0.8, false, 20);
  const std::vector<double> odd = crossing_count_pmf(0.8, true, 21);
  double se = 0.0, so = 0.0;
  for (double p : even) se += p;
  for (double p : odd) so += p;
  CHECK(se == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(so == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(even[0] == doctest::Approx(1.0 / std::cosh(0.8)));
  CHECK(odd[1] == doctest::Approx(0.8 / std::sinh(0.8)));
  CHECK(even[1] == 0.0);

  // empirical mixture frequencies
  long zeros = 0;
  const long reps = 20000;
  for (long i = 0; i < reps; ++i) {
    Rng rng(3, stream::kOneDim, i);
    zeros += sample_crossing_count(0.8, false, rng) == 0;
  }
  const double target = 1.0 / std::cosh(0.8);
  CHECK(std::abs(zeros / static_cast<double>(reps) - target) <
        4.0 * std::sqrt(target * (1.0 - target) / reps));
}

TEST_CASE("time change") {
  OneDimTrace t;
  t.rho = 2.0;
  t.grid = uniform_grid(2.0, 5);
  t.values.assign(5, 0.5);  // constant field: T = rho / value
  CHECK(t.time_change_T() == doctest::Approx(4.0));
  t.values[2] = 0.0;
  CHECK(std::isinf(t.time_change_T()));
}

TEST_CASE("positive conditioning") {
  const auto grid = uniform_grid(1.0, 17);
  for (int i = 0; i < 200; ++i) {
    Rng rng(4, stream::kOneDim, i);
    const OneDimTrace t = sample_B_positive(1.0, 1.0, 1.0, grid, rng);
    CHECK(!t.hits_zero);
    CHECK(t.crossings % 2 == 0);
  }
  Rng rng(4, stream::kOneDim, 0);
  CHECK_THROWS(sample_B_positive(1.0, 0.0, 1.0, grid, rng));
}

TEST_CASE("killed kingman block counts") {
  Rng rng(5, stream::kKingman, 0);
  CHECK(kingman_killed(std::numeric_limits<double>::infinity(), 1.0, 2048, rng) == 0);
  CHECK_THROWS(kingman_killed(0.0, 1.0, 16, rng));

  // from 2 blocks with kill 1 the exit rate is 6
  long still = 0;
  const long reps = 30000;
  const double T = 0.1;
  for (long i = 0; i < reps; ++i) {
    Rng r(6, stream::kKingman, i);
    still += kingman_killed(T, 1.0, 2, r) == 2;
  }
  const double target = std::exp(-6.0 * T);
  CHECK(std::abs(still / static_cast<double>(reps) - target) <
        4.0 * std::sqrt(target * (1.0 - target) / reps));
}

TEST_CASE("mu process construction facts") {
  int done = 0;
  for (int i = 0; i < 30 && done < 12; ++i) {
    Rng rng(7, stream::kOneDim, i);
    const MuProcessTrace t = mu_process_trace(1.0, 0.5, 1024, rng, 2000000);
    if (!t.completed) continue;
    ++done;
    CHECK(t.crossings % 2 == 0);
    CHECK(t.local_time_at_0 >= 0.5);         // stops at the budget
    CHECK(t.local_time_at_0 < 0.5 + 0.25);   // small overshoot only
  }
  CHECK(done >= 12);
}
