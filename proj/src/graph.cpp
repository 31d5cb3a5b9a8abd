#include "loopsoup/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace loopsoup {

MetricGraph::MetricGraph(int vertex_count, VertexId sink, std::vector<Edge> edges,
                         std::vector<std::string> names, bool require_connected)
    : vertex_count_(vertex_count), sink_(sink), edges_(std::move(edges)), names_(std::move(names)) {
  if (names_.empty()) {
    names_.resize(vertex_count_);
    for (int v = 0; v < vertex_count_; ++v) names_[v] = std::to_string(v);
  }
  for (size_t i = 0; i < edges_.size(); ++i) {
    edges_[i].id = static_cast<EdgeId>(i);
    edges_[i].sink_adjacent = (edges_[i].a == sink_ || edges_[i].b == sink_);
  }
  adjacency_.assign(vertex_count_, {});
  for (const Edge& e : edges_) {
    adjacency_[e.a].push_back({e.id, 0});
    adjacency_[e.b].push_back({e.id, 1});
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
  validate(require_connected);
}

void MetricGraph::validate(bool require_connected) const {
  if (vertex_count_ <= 0) throw std::invalid_argument("graph: no vertices");
  if (sink_ < 0 || sink_ >= vertex_count_) throw std::invalid_argument("graph: missing sink");
  for (const Edge& e : edges_) {
    if (e.a < 0 || e.a >= vertex_count_ || e.b < 0 || e.b >= vertex_count_)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw std::invalid_argument("graph: nonpositive edge length");
  }
  if (!require_connected) return;
  // connectivity as an undirected multigraph
  std::vector<char> seen(vertex_count_, 0);
  std::vector<VertexId> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (HalfEdge h : adjacency_[v]) {
      const VertexId u = tip_of(h);
      if (!seen[u]) {
        seen[u] = 1;
        stack.push_back(u);
      }
    }
  }
  for (int v = 0; v < vertex_count_; ++v)
    if (!seen[v]) throw std::invalid_argument("graph: disconnected");
}

int MetricGraph::degree_interior(VertexId v) const {
  int d = 0;
  for (HalfEdge h : adjacency_[v])
    if (!edges_[h.edge].sink_adjacent) ++d;
  return d;
}

std::optional<VertexId> MetricGraph::find_vertex(const std::string& name) const {
  for (int v = 0; v < vertex_count_; ++v)
    if (names_[v] == name) return v;
  return std::nullopt;
}

std::vector<std::tuple<VertexId, VertexId, double, bool>> MetricGraph::canonical_edge_list() const {
  std::vector<std::tuple<VertexId, VertexId, double, bool>> out;
  out.reserve(edges_.size());
  for (const Edge& e : edges_)
    out.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b), e.length, e.sink_adjacent);
  std::sort(out.begin(), out.end());
  return out;
}

MetricGraph build_graph(const std::vector<EdgeSpec>& specs, const std::string& sink_name) {
  if (specs.empty()) throw std::invalid_argument("build_graph: empty edge list");
  std::vector<std::string> names;
  std::map<std::string, VertexId> ids;
  auto intern = [&](const std::string& n) {
    auto it = ids.find(n);
    if (it != ids.end()) return it->second;
    const VertexId v = static_cast<VertexId>(names.size());
    names.push_back(n);
    ids.emplace(n, v);
    return v;
  };
  std::vector<Edge> edges;
  for (const EdgeSpec& s : specs) {
    Edge e;
    e.a = intern(s.a);
    e.b = intern(s.b);
    e.length = s.length;
    edges.push_back(e);
  }
  auto it = ids.find(sink_name);
  if (it == ids.end()) throw std::invalid_argument("build_graph: sink not in edge list");
  const int n = static_cast<int>(names.size());
  return MetricGraph(n, it->second, std::move(edges), std::move(names));
}

MetricGraph load_graph_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  nlohmann::json j;
  in >> j;
  std::vector<EdgeSpec> specs;
  for (const auto& e : j.at("edges"))
    specs.push_back({e.at("a").get<std::string>(), e.at("b").get<std::string>(),
                     e.at("len").get<double>()});
  return build_graph(specs, j.at("sink").get<std::string>());
}

void save_graph_json(const MetricGraph& g, const std::string& path) {
  nlohmann::json j;
  j["sink"] = g.name(g.sink());
  auto verts = nlohmann::json::array();
  for (int v = 0; v < g.vertex_count(); ++v) verts.push_back(g.name(v));
  j["vertices"] = verts;
  auto edges = nlohmann::json::array();
  for (const Edge& e : g.edges())
    edges.push_back({{"a", g.name(e.a)}, {"b", g.name(e.b)}, {"len", e.length}});
  j["edges"] = edges;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

// ---- star extension --------------------------------------------------------

bool StarGraph::is_star_edge(EdgeId e) const {
  return std::binary_search(star_edges.begin(), star_edges.end(), e);
}

bool StarGraph::is_star_vertex(VertexId v) const {
  return std::find(star_vertices.begin(), star_vertices.end(), v) != star_vertices.end();
}

const StarGraph::ReplicaInfo* StarGraph::replica_of_vertex(VertexId v) const {
  for (const auto& r : replica_info)
    if (r.replica == v) return &r;
  return nullptr;
}

StarGraph star_extend(const MetricGraph& g, const std::vector<VertexId>& w, double stub_length) {
  for (VertexId v : w)
    if (g.is_sink(v)) throw std::invalid_argument("star_extend: W contains the sink");
  if (!(stub_length > 0.0)) throw std::invalid_argument("star_extend: stub_length <= 0");
  std::vector<char> in_w(g.vertex_count(), 0);
  for (VertexId v : w) in_w[v] = 1;

  std::vector<std::string> names;
  for (int v = 0; v < g.vertex_count(); ++v) names.push_back(g.name(v));

  // new endpoints of each base edge, replica vertices appended in half-edge order
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  StarGraph out;
  int next = g.vertex_count();
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (!in_w[v]) continue;
    for (HalfEdge h : g.half_edges(v)) {
      const VertexId r = next++;
      names.push_back(g.name(v) + "'" + std::to_string(h.edge) + (h.dir ? "b" : "a"));
      // re-root this end of the base edge at the replica
      if (h.dir == 0) edges[h.edge].a = r;
      else edges[h.edge].b = r;
      StarGraph::ReplicaInfo info;
      info.replica = r;
      info.base_vertex = v;
      info.base_half_edge = h;
      out.replica_info.push_back(info);
    }
  }
  out.old_edge_of.resize(edges.size());
  for (size_t i = 0; i < edges.size(); ++i) out.old_edge_of[i] = static_cast<EdgeId>(i);
  for (auto& info : out.replica_info) {
    Edge stub;
    stub.a = info.base_vertex;
    stub.b = info.replica;
    stub.length = stub_length;
    info.star_edge = static_cast<EdgeId>(edges.size());
    edges.push_back(stub);
    out.old_edge_of.push_back(-1);
    out.star_edges.push_back(info.star_edge);
    out.replicas.push_back(info.replica);
  }
  out.graph = MetricGraph(next, g.sink(), std::move(edges), std::move(names));
  out.star_vertices = w;
  std::sort(out.star_edges.begin(), out.star_edges.end());
  return out;
}

MetricGraph collapse_star_edges(const StarGraph& s) {
  // merge each replica back into its base star vertex; drop the stubs
  const MetricGraph& g = s.graph;
  std::vector<VertexId> remap(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) remap[v] = v;
  for (const auto& info : s.replica_info) remap[info.replica] = info.base_vertex;

  // compact ids (replicas vanish)
  std::vector<VertexId> compact(g.vertex_count(), -1);
  std::vector<std::string> names;
  int next = 0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (remap[v] == v) {
      compact[v] = next++;
      names.push_back(g.name(v));
    }
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (s.is_star_edge(e.id)) continue;
    Edge ne;
    ne.a = compact[remap[e.a]];
    ne.b = compact[remap[e.b]];
    ne.length = e.length;
    edges.push_back(ne);
  }
  return MetricGraph(next, compact[remap[g.sink()]], std::move(edges), std::move(names));
}

Detachment detach_vertex(const MetricGraph& g, VertexId v0, HalfEdge e0, double stub_length) {
  if (g.root_of(e0) != v0) throw std::invalid_argument("detach_vertex: e0 not rooted at v0");
  std::vector<std::string> names;
  for (int v = 0; v < g.vertex_count(); ++v) names.push_back(g.name(v));
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());

  Detachment out;
  out.v0 = v0;
  out.vbar = g.vertex_count();
  out.vstar = g.vertex_count() + 1;
  names.push_back(g.name(v0) + "_bar");
  names.push_back(g.name(v0) + "_star");

  // the root end of e0 moves to vbar; for a self-loop only that end detaches
  if (e0.dir == 0) edges[e0.edge].a = out.vbar;
  else edges[e0.edge].b = out.vbar;

  Edge s1;
  s1.a = out.vstar;
  s1.b = v0;
  s1.length = stub_length;
  out.star_edge_v0 = static_cast<EdgeId>(edges.size());
  edges.push_back(s1);
  Edge s2;
  s2.a = out.vstar;
  s2.b = out.vbar;
  s2.length = stub_length;
  out.star_edge_vbar = static_cast<EdgeId>(edges.size());
  edges.push_back(s2);

  out.graph = MetricGraph(g.vertex_count() + 2, g.sink(), std::move(edges), std::move(names));
  return out;
}

Subgraph subgraph_boundary(const MetricGraph& g, std::vector<VertexId> vertices,
                           std::vector<EdgeId> edges) {
  std::sort(vertices.begin(), vertices.end());
  std::sort(edges.begin(), edges.end());
  std::set<VertexId> vs(vertices.begin(), vertices.end());
  std::set<EdgeId> es(edges.begin(), edges.end());
  for (EdgeId e : edges) {
    if (!vs.count(g.edge(e).a) || !vs.count(g.edge(e).b))
      throw std::invalid_argument("subgraph_boundary: edge endpoint outside vertex set");
  }
  Subgraph out;
  out.vertices = vertices;
  out.edges = edges;
  for (VertexId v : vertices) {
    for (HalfEdge h : g.half_edges(v)) {
      if (!es.count(h.edge)) {
        out.boundary.push_back(v);
        break;
      }
    }
  }
  return out;
}

}  // namespace loopsoup
