#include <doctest.h>

#include <cmath>

#include "loopsoup/besq.hpp"
#include "loopsoup/experiments.hpp"
#include "loopsoup/occupation.hpp"
#include "loopsoup/one_dim.hpp"
#include "loopsoup/stats.hpp"

#include "test_oracles.hpp"

using namespace loopsoup;

TEST_CASE("zero-hit law basics") {
  Rng rng(1, 7, 0);
  CHECK(!edge_zero_hit(1.0, 1.0, 1.0, 2, rng));   // crossings keep it positive
  CHECK(edge_zero_hit(0.0, 1.0, 1.0, 0, rng));    // dead endpoint
  CHECK(no_zero_probability(1.0, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("edge field endpoints and flags") {
  Rng rng(2, 7, 0);
  const auto grid = uniform_grid(1.0, 9);
  for (int n : {0, 1, 3}) {
    const EdgeField f = sample_edge_field(0.8, 1.7, 1.0, n, false, grid, rng);
    CHECK(f.values.front() == doctest::Approx(0.8));
    CHECK(f.values.back() == doctest::Approx(1.7));
    if (n >= 1) {
      CHECK(!f.zero_hit);
      for (char z : f.interval_zero) CHECK(!z);
    }
  }
  // a zero grid value forces the flag
  for (int i = 0; i < 200; ++i) {
    const EdgeField f = sample_edge_field(1.0, 1.0, 1.0, 0, false, grid, rng);
    bool zero_value = false;
    for (double v : f.values) zero_value |= v == 0.0;
    if (zero_value) CHECK(f.zero_hit);
  }
}

TEST_CASE("no-zero frequency matches the closed form") {
  const auto grid = uniform_grid(1.0, 17);
  long no_zero = 0;
  const long reps = 20000;
  for (long i = 0; i < reps; ++i) {
    Rng rng(3, 7, i);
    no_zero += !sample_edge_field(1.0, 1.0, 1.0, 0, false, grid, rng).zero_hit;
  }
  const double target = no_zero_probability(1.0, 1.0, 1.0);
  CHECK(std::abs(static_cast<double>(no_zero) / reps - target) <
        4.0 * std::sqrt(target * (1.0 - target) / reps));
}

TEST_CASE("conditional fields mix to the plain bridges") {
  // the cosh mixture of crossing-conditioned traces is the dimension-1 bridge,
  // the sinh mixture the dimension-3 bridge (midpoint law)
  const auto grid = uniform_grid(1.0, 3);
  const double a = 1.1, b = 0.9;
  std::vector<double> even_mix, odd_mix;
  for (int i = 0; i < 6000; ++i) {
    Rng rng(4, 7, i);
    even_mix.push_back(sample_B(1.0, a, b, grid, rng).values[1]);
    odd_mix.push_back(sample_C(1.0, a, b, grid, rng).values[1]);
  }
  const TestResult t1 =
      ks_one_sample(even_mix, testing::bridge_marginal_cdf_table(1, a, b, 1.0, 0.5));
  INFO("even p=", t1.p_value);
  CHECK(t1.p_value > 1e-4);
  const TestResult t3 =
      ks_one_sample(odd_mix, testing::bridge_marginal_cdf_table(3, a, b, 1.0, 0.5));
  INFO("odd p=", t3.p_value);
  CHECK(t3.p_value > 1e-4);
}

TEST_CASE("crossed stub field is a dimension-3 bridge") {
  // one end pinned at zero, one crossing: the mixture is trivial and the trace
  // is exactly the BESQ^3 bridge
  const auto grid = uniform_grid(1.0, 3);
  const double y = 1.3;
  std::vector<double> mids;
  for (int i = 0; i < 6000; ++i) {
    Rng rng(5, 7, i);
    mids.push_back(sample_edge_field(0.0, y, 1.0, 1, false, grid, rng).values[1]);
  }
  const TestResult t = ks_one_sample(mids, testing::bridge_marginal_cdf_table(3, 0.0, y, 1.0, 0.5));
  CHECK(t.p_value > 1e-4);
}

TEST_CASE("cluster extraction") {
  const MetricGraph theta = builtin_graph("theta");
  auto make_field = [&](std::vector<char> zero_flags) {
    OccupationField f;
    f.vertex_times.assign(theta.vertex_count(), 1.0);
    f.vertex_times[theta.sink()] = 0.0;
    f.edge_fields.resize(theta.edges().size());
    for (const Edge& e : theta.edges()) {
      EdgeField ef;
      ef.edge = e.id;
      ef.grid = uniform_grid(e.length, 3);
      ef.values = {1.0, 1.0, 1.0};
      ef.zero_hit = zero_flags[e.id];
      ef.interval_zero.assign(2, 0);
      f.edge_fields[e.id] = ef;
    }
    return f;
  };
  std::vector<EdgeId> theta_edges;
  for (const Edge& e : theta.edges())
    if (!e.sink_adjacent) theta_edges.push_back(e.id);
  const EdgeId sink_edge = [&] {
    for (const Edge& e : theta.edges())
      if (e.sink_adjacent) return e.id;
    return EdgeId{-1};
  }();

  // all edges dead: two singleton vertex clusters, no edge clusters
  std::vector<char> all_dead(theta.edges().size(), 1);
  const ClusterSet dead = extract_clusters(theta, make_field(all_dead));
  CHECK(dead.count == 2);
  for (auto& edges : dead.cluster_edges) CHECK(edges.empty());

  // nothing dead except the sink edge: a single cluster with all theta edges
  std::vector<char> alive(theta.edges().size(), 0);
  alive[sink_edge] = 1;
  const ClusterSet one = extract_clusters(theta, make_field(alive));
  CHECK(one.count == 1);
  CHECK(one.cluster_edges[0].size() == 3);

  // one theta edge dead: still one cluster holding the other two
  std::vector<char> partial = alive;
  partial[theta_edges[1]] = 1;
  const ClusterSet part = extract_clusters(theta, make_field(partial));
  CHECK(part.count == 1);
  CHECK(part.cluster_edges[0].size() == 2);
}
