#include <doctest.h>

#include <cmath>

#include "loopsoup/currents.hpp"
#include "loopsoup/experiments.hpp"
#include "loopsoup/loop_soup.hpp"

using namespace loopsoup;

namespace {
std::vector<EdgeId> interior_edges(const MetricGraph& g) {
  std::vector<EdgeId> out;
  for (const Edge& e : g.edges())
    if (!e.sink_adjacent) out.push_back(e.id);
  return out;
}
}  // namespace

TEST_CASE("cycle dimensions and counts") {
  const MetricGraph tri = builtin_graph("triangle");
  CHECK(cycle_basis(tri, interior_edges(tri)).dimension() == 1);
  CHECK(count_admissible_edges(tri, interior_edges(tri)) == 2);

  const MetricGraph theta = builtin_graph("theta");
  CHECK(count_admissible_edges(theta, interior_edges(theta)) == 4);

  // tree: dimension zero, only the empty configuration
  const MetricGraph path = builtin_graph("path");
  CHECK(count_admissible_edges(path, interior_edges(path)) == 1);

  // self-loops are chords
  const MetricGraph sl = builtin_graph("self_loop");
  CHECK(count_admissible_edges(sl, interior_edges(sl)) == 2);
}

TEST_CASE("uniform admissible sampling on the theta cluster") {
  const MetricGraph theta = builtin_graph("theta");
  const std::vector<EdgeId> edges = interior_edges(theta);
  ClusterSet clusters;
  clusters.count = 1;
  clusters.cluster_edges = {edges};
  clusters.cluster_vertices = {{*theta.find_vertex("u"), *theta.find_vertex("w")}};
  clusters.edge_cluster.assign(theta.edges().size(), -1);
  clusters.vertex_cluster.assign(theta.vertex_count(), -1);
  for (EdgeId e : edges) clusters.edge_cluster[e] = 0;

  std::map<std::string, long> counts;
  const long reps = 20000;
  for (long i = 0; i < reps; ++i) {
    Rng rng(3, stream::kCurrents, i);
    const ParityConfig cfg = admissible_uniform(theta, clusters, rng);
    int deg_u = 0;
    for (EdgeId e : edges) deg_u += cfg.alpha[e];
    CHECK(deg_u % 2 == 0);  // even at both vertices by symmetry of the theta
    counts[cfg.bitstring()] += 1;
  }
  CHECK(counts.size() == 4);
  for (auto& [key, c] : counts)
    CHECK(std::abs(c / static_cast<double>(reps) - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / reps));
}

TEST_CASE("parity of sampled configs is admissible") {
  const MetricGraph fig = builtin_graph("figure1");
  for (int i = 0; i < 100; ++i) {
    Rng rng(5, stream::kCurrents, i);
    const DiscreteLoopConfig c = sample_discrete_soup(fig, rng);
    const ParityConfig parity = parity_of_config(c, fig);
    for (int v = 0; v < fig.vertex_count(); ++v) {
      int sum = 0;
      for (HalfEdge he : fig.half_edges(v)) sum += parity.alpha[he.edge];
      CHECK(sum % 2 == 0);  // self-loops counted twice via both half-edges
    }
  }
  DiscreteLoopConfig empty;
  const ParityConfig zero = parity_of_config(empty, fig);
  for (char a : zero.alpha) CHECK(a == 0);
}

TEST_CASE("parity system solutions") {
  const MetricGraph theta = builtin_graph("theta");
  const std::vector<EdgeId> edges = interior_edges(theta);
  const VertexId u = *theta.find_vertex("u");
  const VertexId w = *theta.find_vertex("w");
  Rng rng(7, stream::kCurrents, 0);

  // solvable iff the total parity is even; the solution count does not depend
  // on the parity vector (brute force over the 8 subsets)
  for (int pu : {0, 1})
    for (int pw : {0, 1}) {
      std::vector<int> parity(theta.vertex_count(), 0);
      parity[u] = pu;
      parity[w] = pw;
      long solutions = 0;
      for (int mask = 0; mask < 8; ++mask) {
        int du = 0;
        for (int i = 0; i < 3; ++i) du += (mask >> i) & 1;
        if (du % 2 == pu && du % 2 == pw) ++solutions;
      }
      auto cfg = admissible_with_parity(theta, edges, parity, rng);
      if ((pu + pw) % 2 == 0) {
        REQUIRE(cfg.has_value());
        CHECK(solutions == 4);
        int du = 0;
        for (EdgeId e : edges) du += cfg->alpha[e];
        CHECK(du % 2 == pu);
      } else {
        CHECK(!cfg.has_value());
      }
    }
}

TEST_CASE("current parity weights") {
  const MetricGraph tri = builtin_graph("triangle");
  const std::vector<EdgeId> edges = interior_edges(tri);

  // beta -> 0 concentrates on the empty configuration
  const ParityDistribution small = current_parity_weights(tri, edges, {1e-9, 1e-9, 1e-9});
  double p_empty = 0.0;
  for (size_t i = 0; i < small.support.size(); ++i) {
    int ones = 0;
    for (EdgeId e : edges) ones += small.support[i].alpha[e];
    if (ones == 0) p_empty = small.prob[i];
  }
  CHECK(p_empty == doctest::Approx(1.0).epsilon(1e-8));

  // beta -> infinity on a cycle approaches the uniform pair
  const ParityDistribution big = current_parity_weights(tri, edges, {20.0, 20.0, 20.0});
  for (double p : big.prob) CHECK(p == doctest::Approx(0.5).epsilon(1e-8));
}
