#include <doctest.h>

#include <cmath>
#include <set>

#include "loopsoup/experiments.hpp"
#include "loopsoup/gff.hpp"
#include "loopsoup/loop_soup.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("gff sampler covariance") {
  const MetricGraph g = builtin_graph("triangle");
  const GffSampler s = make_gff_sampler(g);
  const std::vector<double> green = green_function(g);
  const int n = g.vertex_count();
  std::vector<Welford> var(n);
  Welford cross;
  const VertexId v1 = *g.find_vertex("v1");
  const VertexId v2 = *g.find_vertex("v2");
  const long reps = 30000;
  for (long i = 0; i < reps; ++i) {
    Rng rng(31, stream::kGff, i);
    const std::vector<double> phi = sample_gff(s, rng);
    CHECK(phi[g.sink()] == 0.0);
    for (int v = 0; v < n; ++v) var[v].add(phi[v] * phi[v]);
    cross.add(phi[v1] * phi[v2]);
  }
  for (int v = 0; v < n; ++v) {
    if (g.is_sink(v)) continue;
    CHECK(std::abs(var[v].mean - green_at(green, n, v, v)) < 4.0 * var[v].se());
  }
  CHECK(std::abs(cross.mean - green_at(green, n, v1, v2)) < 4.0 * cross.se());
}

TEST_CASE("single edge marginal is N(0, 2 rho)") {
  const MetricGraph g = builtin_graph("single_edge");
  const GffSampler s = make_gff_sampler(g);
  std::vector<double> phi;
  for (long i = 0; i < 20000; ++i) {
    Rng rng(32, stream::kGff, i);
    phi.push_back(sample_gff(s, rng)[*g.find_vertex("v")]);
  }
  const TestResult t =
      ks_one_sample(phi, [](double x) { return normal_cdf(x, 0.0, std::sqrt(2.0)); });
  CHECK(t.p_value > 1e-4);
}

TEST_CASE("cluster signs are fair and shared within clusters") {
  const MetricGraph g = builtin_graph("triangle");
  const SoupSampler sampler = make_soup_sampler(g);
  long plus = 0, total = 0;
  for (long i = 0; i < 4000; ++i) {
    Rng rng(33, stream::kGff, i);
    const DiscreteLoopConfig c = sampler.sample(rng);
    const std::vector<double> times = sample_vertex_local_times(c, g, rng);
    const OccupationField field = sample_occupation(g, c, times, 5, rng);
    const ClusterSet clusters = extract_clusters(g, field);
    const std::vector<int> sign = lupu_signs(g, clusters, rng);
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (clusters.vertex_cluster[v] < 0) {
        CHECK(sign[v] == 0);
        continue;
      }
      ++total;
      plus += sign[v] > 0;
      // all vertices of one cluster share the sign
      for (int w = 0; w < g.vertex_count(); ++w)
        if (clusters.vertex_cluster[w] == clusters.vertex_cluster[v])
          CHECK(sign[w] == sign[v]);
    }
  }
  const double freq = static_cast<double>(plus) / total;
  CHECK(std::abs(freq - 0.5) < 4.0 * std::sqrt(0.25 / total));
}

TEST_CASE("exploration terminates and starts at the root local time") {
  const MetricGraph g = builtin_graph("triangle");
  const SoupSampler sampler = make_soup_sampler(g);
  const VertexId v2 = *g.find_vertex("v2");
  double total_len = 0.0;
  for (const Edge& e : g.edges()) total_len += e.length;
  for (long i = 0; i < 50; ++i) {
    Rng rng(34, stream::kExplore, i);
    const DiscreteLoopConfig c = sampler.sample(rng);
    const std::vector<double> times = sample_vertex_local_times(c, g, rng);
    const OccupationField field = sample_occupation(g, c, times, 17, rng);
    const ExplorationResult r = explore_cluster(g, field, v2);
    REQUIRE(!r.steps.empty());
    CHECK(r.steps.front().x == doctest::Approx(std::sqrt(times[v2])));
    CHECK(r.zeta <= total_len + 1e-9);
    CHECK(r.segments >= 1);
    // time is nondecreasing
    for (size_t j = 1; j < r.steps.size(); ++j) CHECK(r.steps[j].t >= r.steps[j - 1].t);
  }
}

TEST_CASE("euler exploration shares the step layout") {
  const MetricGraph g = builtin_graph("path");
  Rng rng(35, stream::kExplore, 0);
  const ExplorationResult r = explore_euler(g, *g.find_vertex("v"), 1.0, 17, rng);
  REQUIRE(!r.steps.empty());
  CHECK(r.steps.front().x == doctest::Approx(1.0));
}
