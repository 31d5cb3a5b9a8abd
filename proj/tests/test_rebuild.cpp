#include <doctest.h>

#include <cmath>
#include <map>

#include "loopsoup/experiments.hpp"
#include "loopsoup/besq.hpp"
#include "loopsoup/rebuild.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("forced gluing reconstructs the unique loop") {
  // path graph, one crossing on the single interior edge is impossible by
  // parity; use the theta graph with one crossing on two parallel edges
  const MetricGraph theta = builtin_graph("theta");
  std::vector<int> crossings(theta.edges().size(), 0);
  std::vector<EdgeId> interior;
  for (const Edge& e : theta.edges())
    if (!e.sink_adjacent) interior.push_back(e.id);
  crossings[interior[0]] = 1;
  crossings[interior[1]] = 1;
  Rng rng(41, stream::kRebuild, 0);
  const ReconstructedLoops r = glue(theta, crossings, rng);
  CHECK(r.loops.total_loops() == 1);
  CHECK(r.loops.loops.begin()->first.length() == 2);
  // odd parity throws
  std::vector<int> bad = crossings;
  bad[interior[2]] = 1;
  CHECK_THROWS(glue(theta, bad, rng));
}

TEST_CASE("point loops when nothing crosses") {
  const MetricGraph path = builtin_graph("path");
  std::vector<int> none(path.edges().size(), 0);
  Rng rng(42, stream::kRebuild, 1);
  const ReconstructedLoops r = glue(path, none, rng);
  CHECK(r.loops.total_loops() == 0);
  // beta(1/2, 0) is identically one and the PD parts fill it
  for (int v = 0; v < path.vertex_count(); ++v) {
    if (path.is_sink(v)) continue;
    double mass = 0.0;
    for (double m : r.point_loops[v]) mass += m;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("uniform matching frequencies at k = 2") {
  // two parallel crossed pairs at each vertex of the theta graph: k_u = 2;
  // of the 3 pairings of the 4 ends at u, each appears 1/3 of the time
  const MetricGraph theta = builtin_graph("theta");
  std::vector<EdgeId> interior;
  for (const Edge& e : theta.edges())
    if (!e.sink_adjacent) interior.push_back(e.id);
  std::map<int, long> loop_counts;
  const long reps = 6000;
  for (long i = 0; i < reps; ++i) {
    Rng rng(43, stream::kRebuild, i);
    std::vector<int> crossings(theta.edges().size(), 0);
    crossings[interior[0]] = 2;
    crossings[interior[1]] = 2;
    const ReconstructedLoops r = glue(theta, crossings, rng);
    loop_counts[r.loops.total_loops()] += 1;
  }
  // possible outcomes: one loop of length 4 or two loops of length 2
  CHECK(loop_counts.size() == 2);
  for (auto& [loops, count] : loop_counts) CHECK((loops == 1 || loops == 2));
  // P(two two-loops): both vertex matchings must pair the copies straight or
  // crossed consistently; empirical frequency only needs to be stable and
  // bounded away from 0 and 1
  const double f2 = loop_counts[2] / static_cast<double>(reps);
  CHECK(f2 > 0.2);
  CHECK(f2 < 0.6);
}

TEST_CASE("conservation over sampled configs") {
  const MetricGraph fig = builtin_graph("figure1");
  const SoupSampler sampler = make_soup_sampler(fig);
  for (long i = 0; i < 300; ++i) {
    Rng rng(44, stream::kRebuild, i);
    const DiscreteLoopConfig c = sampler.sample(rng);
    const std::vector<int> n = c.crossings(fig);
    const ReconstructedLoops r = glue(fig, n, rng);
    CHECK(r.loops.visit_counts(fig) == c.visit_counts(fig));
    CHECK(r.loops.crossings(fig) == n);
  }
}

TEST_CASE("edge time change on a constant field") {
  EdgeField f;
  f.grid = uniform_grid(2.0, 5);
  f.values.assign(5, 4.0);
  f.zero_hit = false;
  f.interval_zero.assign(4, 0);
  CHECK(edge_time_change(f) == doctest::Approx(0.5));
  f.zero_hit = true;
  CHECK(std::isinf(edge_time_change(f)));
}
