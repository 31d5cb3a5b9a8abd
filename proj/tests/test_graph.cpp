#include <doctest.h>

#include <algorithm>

#include "loopsoup/experiments.hpp"
#include "loopsoup/graph.hpp"

using namespace loopsoup;

TEST_CASE("build_graph basics") {
  const MetricGraph g = build_graph({{"v", "sink", 1.0}}, "sink");
  CHECK(g.vertex_count() == 2);
  CHECK(g.edges().size() == 1);
  CHECK(g.edge(0).sink_adjacent);
  CHECK(g.degree_interior(*g.find_vertex("v")) == 0);

  const MetricGraph tri = builtin_graph("triangle");
  CHECK(tri.vertex_count() == 4);
  CHECK(tri.edges().size() == 4);
  int interior_edges = 0;
  for (const Edge& e : tri.edges()) interior_edges += !e.sink_adjacent;
  CHECK(interior_edges == 3);
}

TEST_CASE("build_graph errors") {
  CHECK_THROWS(build_graph({}, "sink"));
  CHECK_THROWS(build_graph({{"a", "b", 1.0}}, "sink"));                      // missing sink
  CHECK_THROWS(build_graph({{"a", "b", -1.0}, {"b", "sink", 1.0}}, "sink")); // bad length
  CHECK_THROWS(build_graph({{"a", "b", 1.0}, {"c", "sink", 1.0}}, "sink"));  // disconnected
}

TEST_CASE("deterministic construction") {
  const MetricGraph a = builtin_graph("triangle");
  const MetricGraph b = builtin_graph("triangle");
  CHECK(a.canonical_edge_list() == b.canonical_edge_list());
  for (int v = 0; v < a.vertex_count(); ++v) CHECK(a.name(v) == b.name(v));
}

TEST_CASE("star_extend replica counts match the worked example") {
  const MetricGraph g = builtin_graph("figure1");
  const StarGraph s = star_extend(g, {*g.find_vertex("1"), *g.find_vertex("2"), *g.find_vertex("3")});
  auto replicas_of = [&](const std::string& name) {
    int n = 0;
    for (const auto& info : s.replica_info) n += info.base_vertex == *g.find_vertex(name);
    return n;
  };
  CHECK(replicas_of("1") == 4);
  CHECK(replicas_of("2") == 3);
  CHECK(replicas_of("3") == 5);  // self-loop contributes two
  for (const auto& info : s.replica_info)
    CHECK(s.graph.half_edges(info.replica).size() == 2);
}

TEST_CASE("star_extend trivial and degree cases") {
  const MetricGraph g = builtin_graph("path");
  const StarGraph empty = star_extend(g, {});
  CHECK(empty.graph.canonical_edge_list() == g.canonical_edge_list());

  const VertexId w = *g.find_vertex("w");
  const StarGraph s = star_extend(g, {w});
  // degree of w is 2 (one interior edge, one sink edge): 2 replicas, 2 stubs
  CHECK(s.replicas.size() == 2);
  CHECK(s.star_edges.size() == 2);
  CHECK_THROWS(star_extend(g, {g.sink()}));
}

TEST_CASE("collapse recovers the base graph") {
  for (const char* name : {"path", "triangle", "theta", "figure1", "self_loop"}) {
    const MetricGraph g = builtin_graph(name);
    std::vector<VertexId> w;
    for (int v = 0; v < g.vertex_count(); ++v)
      if (!g.is_sink(v)) w.push_back(v);
    const StarGraph s = star_extend(g, w, 0.25);
    const MetricGraph back = collapse_star_edges(s);
    CHECK(back.canonical_edge_list() == g.canonical_edge_list());
  }
}

TEST_CASE("d_v equals the replica count of a singleton extension") {
  const MetricGraph g = builtin_graph("figure1");
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_sink(v)) continue;
    const StarGraph s = star_extend(g, {v});
    int non_sink_stubs = 0;
    for (const auto& info : s.replica_info)
      non_sink_stubs += !g.edge(info.base_half_edge.edge).sink_adjacent;
    CHECK(non_sink_stubs == g.degree_interior(v));
  }
}

TEST_CASE("detach_vertex counts") {
  const MetricGraph g = builtin_graph("triangle");
  const VertexId v2 = *g.find_vertex("v2");
  const HalfEdge e0 = g.half_edges(v2).front();
  const Detachment d = detach_vertex(g, v2, e0);
  CHECK(d.graph.vertex_count() == g.vertex_count() + 2);
  CHECK(d.graph.edges().size() == g.edges().size() + 2);
  const Edge& moved = d.graph.edge(e0.edge);
  CHECK(((moved.a == d.vbar) || (moved.b == d.vbar)));
  CHECK_THROWS(detach_vertex(g, *g.find_vertex("v1"), e0));
}

TEST_CASE("detach_vertex self-loop case") {
  const MetricGraph g = builtin_graph("self_loop");
  const VertexId v = *g.find_vertex("v");
  HalfEdge loop_he{};
  for (HalfEdge he : g.half_edges(v))
    if (g.edge(he.edge).a == g.edge(he.edge).b) loop_he = he;
  const Detachment d = detach_vertex(g, v, loop_he);
  // only the root end detaches: the loop becomes an ordinary edge v - vbar
  const Edge& moved = d.graph.edge(loop_he.edge);
  CHECK(moved.a != moved.b);
  CHECK(((moved.a == d.vbar && moved.b == v) || (moved.b == d.vbar && moved.a == v)));
}

TEST_CASE("subgraph_boundary") {
  const MetricGraph g = builtin_graph("path");
  const VertexId v = *g.find_vertex("v");
  const VertexId w = *g.find_vertex("w");
  EdgeId vw = -1;
  for (const Edge& e : g.edges())
    if (!e.sink_adjacent) vw = e.id;
  const Subgraph s = subgraph_boundary(g, {v, w}, {vw});
  CHECK(s.boundary == std::vector<VertexId>{w});  // w touches the sink edge
  CHECK_THROWS(subgraph_boundary(g, {v}, {vw}));  // endpoint outside the set

  // a vertex kept without its edges lies on the boundary
  const Subgraph lone = subgraph_boundary(g, {v}, {});
  CHECK(lone.boundary == std::vector<VertexId>{v});
}

TEST_CASE("graph json round trip") {
  const MetricGraph g = builtin_graph("two_boundary");
  save_graph_json(g, "/tmp/loopsoup_test_graph.json");
  const MetricGraph back = load_graph_json("/tmp/loopsoup_test_graph.json");
  CHECK(back.canonical_edge_list() == g.canonical_edge_list());
}
