#include <doctest.h>

#include <cmath>

#include "loopsoup/experiments.hpp"
#include "loopsoup/harmonic.hpp"

using namespace loopsoup;

TEST_CASE("vertex rates") {
  const MetricGraph single = builtin_graph("single_edge");
  CHECK(vertex_rates(single)[*single.find_vertex("v")] == doctest::Approx(1.0));

  const MetricGraph path = builtin_graph("path");
  CHECK(vertex_rates(path)[*path.find_vertex("v")] == doctest::Approx(1.0));
  CHECK(vertex_rates(path)[*path.find_vertex("w")] == doctest::Approx(2.0));

  const MetricGraph tri = builtin_graph("triangle");
  CHECK(vertex_rates(tri)[*tri.find_vertex("v1")] == doctest::Approx(3.0));
  CHECK(vertex_rates(tri)[*tri.find_vertex("v2")] == doctest::Approx(2.0));
  CHECK(vertex_rates(tri)[*tri.find_vertex("v3")] == doctest::Approx(2.0));

  // self-loop counts twice
  const MetricGraph sl = builtin_graph("self_loop");
  CHECK(vertex_rates(sl)[*sl.find_vertex("v")] == doctest::Approx(3.0));
}

TEST_CASE("return probabilities") {
  const MetricGraph single = builtin_graph("single_edge");
  CHECK(return_probability(single, *single.find_vertex("v"), {single.sink()}) ==
        doctest::Approx(0.0));

  const MetricGraph path = builtin_graph("path");
  const VertexId v = *path.find_vertex("v");
  const VertexId w = *path.find_vertex("w");
  CHECK(return_probability(path, v, {path.sink()}) == doctest::Approx(0.5));
  // all neighbors killed
  CHECK(return_probability(path, w, {path.sink(), v}) == doctest::Approx(0.0));
  CHECK_THROWS(return_probability(path, v, {w}));  // kill set without the sink
}

TEST_CASE("excursion kernel masses") {
  const MetricGraph single = builtin_graph("single_edge");
  const VertexId v = *single.find_vertex("v");
  ExcursionKernel k = excursion_kernel(single, v, {}, {single.sink()});
  CHECK(k.mass.at(single.sink()) == doctest::Approx(0.5));  // 1/(2 rho)

  // rho = 2 halves the mass
  const MetricGraph long_edge = build_graph({{"v", "sink", 2.0}}, "sink");
  ExcursionKernel k2 =
      excursion_kernel(long_edge, *long_edge.find_vertex("v"), {}, {long_edge.sink()});
  CHECK(k2.mass.at(long_edge.sink()) == doctest::Approx(0.25));

  // two boundary vertices joined by one outside edge of length rho'
  const MetricGraph g = builtin_graph("two_boundary");
  const VertexId u = *g.find_vertex("u");
  const VertexId w = *g.find_vertex("w");
  std::vector<char> mask(g.edges().size(), 0);
  for (const Edge& e : g.edges())
    if ((e.a == u && e.b == w) || (e.a == w && e.b == u)) mask[e.id] = 1;
  ExcursionKernel k3 = excursion_kernel(g, u, mask, {u, w, g.sink()});
  CHECK(k3.mass.at(w) == doctest::Approx(1.0 / 6.0));
  // symmetric in the pair
  ExcursionKernel k4 = excursion_kernel(g, w, mask, {u, w, g.sink()});
  CHECK(k4.mass.at(u) == doctest::Approx(k3.mass.at(w)));

  // unreachable target has zero mass
  std::vector<char> all(g.edges().size(), 1);
  ExcursionKernel k5 = excursion_kernel(g, u, all, {w, g.sink()});
  CHECK(k5.mass.at(w) == doctest::Approx(0.0));
}

TEST_CASE("escape mass identity H(v, sink) = a_v/2 (1 - p(v,v))") {
  for (const char* name : {"path", "triangle", "self_loop", "theta"}) {
    const MetricGraph g = builtin_graph(name);
    const std::vector<double> rates = vertex_rates(g);
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (g.is_sink(v)) continue;
      const double p = return_probability(g, v, {g.sink()});
      const ExcursionKernel k = excursion_kernel(g, v, {}, {g.sink()});
      CHECK(k.mass.at(g.sink()) == doctest::Approx(0.5 * rates[v] * (1.0 - p)).epsilon(1e-8));
    }
  }
}

TEST_CASE("green function calibration") {
  const MetricGraph single = builtin_graph("single_edge");
  const std::vector<double> g1 = green_function(single);
  CHECK(green_at(g1, single.vertex_count(), 0, 0) == doctest::Approx(2.0));

  const MetricGraph rho2 = build_graph({{"v", "sink", 2.0}}, "sink");
  CHECK(green_at(green_function(rho2), 2, *rho2.find_vertex("v"), *rho2.find_vertex("v")) ==
        doctest::Approx(4.0));

  const MetricGraph path = builtin_graph("path");
  const std::vector<double> gp = green_function(path);
  const int n = path.vertex_count();
  const VertexId v = *path.find_vertex("v");
  CHECK(green_at(gp, n, v, v) == doctest::Approx(4.0));
  CHECK(green_at(gp, n, path.sink(), v) == doctest::Approx(0.0));
}

TEST_CASE("green symmetry and the local-time mean identity") {
  for (const char* name : {"triangle", "theta", "self_loop", "figure1"}) {
    const MetricGraph g = builtin_graph(name);
    const std::vector<double> green = green_function(g);
    const int n = g.vertex_count();
    for (int u = 0; u < n; ++u)
      for (int w = 0; w < n; ++w)
        CHECK(std::abs(green_at(green, n, u, w) - green_at(green, n, w, u)) < 1e-10);
    // mean of the visit pmf times 2/a_v plus 1/a_v equals G(v,v)/2
    const std::vector<double> rates = vertex_rates(g);
    for (int v = 0; v < n; ++v) {
      if (g.is_sink(v)) continue;
      const double p = return_probability(g, v, {g.sink()});
      const double mean_k = 0.5 * p / (1.0 - p);
      CHECK(mean_k * 2.0 / rates[v] + 1.0 / rates[v] ==
            doctest::Approx(0.5 * green_at(green, n, v, v)).epsilon(1e-8));
    }
  }
}

TEST_CASE("potential table bundles") {
  const MetricGraph g = builtin_graph("triangle");
  const PotentialTable t = make_potential_table(g);
  CHECK(t.return_prob[*g.find_vertex("v2")] > 0.0);
  CHECK(t.green_at(g.sink(), g.sink()) == 0.0);
}
