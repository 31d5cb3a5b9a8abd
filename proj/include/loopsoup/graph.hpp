#pragma once

#include <optional>
#include <string>
#include <vector>

namespace loopsoup {

using VertexId = int;
using EdgeId = int;

struct Edge {
  EdgeId id = -1;
  VertexId a = -1;
  VertexId b = -1;
  double length = 0.0;
  bool sink_adjacent = false;
};

// A directed edge: edge id plus the end it is rooted at (0 -> rooted at a).
struct HalfEdge {
  EdgeId edge = -1;
  int dir = 0;
  bool operator==(const HalfEdge&) const = default;
  bool operator<(const HalfEdge& o) const {
    return edge != o.edge ? edge < o.edge : dir < o.dir;
  }
};

// Finite metric graph with a distinguished absorbing sink. Vertices are dense
// ids 0..vertex_count-1, the sink included. Edges touching the sink are kept
// in the structure but flagged sink_adjacent; the walk machinery that iterates
// over "E" skips them. Immutable once built.
class MetricGraph {
 public:
  MetricGraph() = default;
  // require_connected is relaxed for internally refined graphs (exploration
  // cuts can disconnect the unexplored part); build_graph always validates
  MetricGraph(int vertex_count, VertexId sink, std::vector<Edge> edges,
              std::vector<std::string> names = {}, bool require_connected = true);

  int vertex_count() const { return vertex_count_; }
  VertexId sink() const { return sink_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  // directed edges rooted at v, in canonical (edge id, dir) order
  const std::vector<HalfEdge>& half_edges(VertexId v) const { return adjacency_[v]; }

  VertexId root_of(HalfEdge h) const { return h.dir == 0 ? edges_[h.edge].a : edges_[h.edge].b; }
  VertexId tip_of(HalfEdge h) const { return h.dir == 0 ? edges_[h.edge].b : edges_[h.edge].a; }
  HalfEdge reversed(HalfEdge h) const { return {h.edge, 1 - h.dir}; }

  // d_v: directed edges rooted at v excluding sink-adjacent ones
  int degree_interior(VertexId v) const;

  const std::string& name(VertexId v) const { return names_[v]; }
  std::optional<VertexId> find_vertex(const std::string& name) const;

  bool is_sink(VertexId v) const { return v == sink_; }

  // sorted (min endpoint, max endpoint, length, sink flag) list; two graphs
  // built over the same vertex ids compare equal iff these match
  std::vector<std::tuple<VertexId, VertexId, double, bool>> canonical_edge_list() const;

 private:
  void validate(bool require_connected) const;
  int vertex_count_ = 0;
  VertexId sink_ = -1;
  std::vector<Edge> edges_;
  std::vector<std::vector<HalfEdge>> adjacency_;
  std::vector<std::string> names_;
};

// build from an explicit edge list; vertex names are created in first-seen
// order so identical specs produce identical id assignments
struct EdgeSpec {
  std::string a;
  std::string b;
  double length = 1.0;
};
MetricGraph build_graph(const std::vector<EdgeSpec>& edges, const std::string& sink_name);

MetricGraph load_graph_json(const std::string& path);
void save_graph_json(const MetricGraph& g, const std::string& path);

// ---- star extension -------------------------------------------------------

struct StarGraph {
  MetricGraph graph;
  std::vector<VertexId> star_vertices;            // W, ids in `graph`
  std::vector<VertexId> replicas;                  // all replica vertices
  std::vector<EdgeId> star_edges;                  // E(W)
  // replica bookkeeping: replica vertex -> (base vertex in the source graph,
  // base half-edge it detached, star edge attached to it)
  struct ReplicaInfo {
    VertexId replica = -1;
    VertexId base_vertex = -1;
    HalfEdge base_half_edge;
    EdgeId star_edge = -1;
  };
  std::vector<ReplicaInfo> replica_info;
  std::vector<EdgeId> old_edge_of;                 // new edge id -> base edge id (-1 for star edges)

  bool is_star_edge(EdgeId e) const;
  bool is_star_vertex(VertexId v) const;
  const ReplicaInfo* replica_of_vertex(VertexId v) const;
};

// one replica per directed edge rooted at a W vertex (sink-adjacent edges
// included); star edges all get stub_length
StarGraph star_extend(const MetricGraph& g, const std::vector<VertexId>& w, double stub_length = 1.0);

// contract the star edges back; recovers a graph equal to the input up to
// canonical form
MetricGraph collapse_star_edges(const StarGraph& s);

// detach a single directed edge rooted at v0 (Figure-4 surgery): new vertex
// vbar takes over the root end of e0, star vertex vstar joins v0 and vbar
struct Detachment {
  MetricGraph graph;
  VertexId v0 = -1;
  VertexId vbar = -1;
  VertexId vstar = -1;
  EdgeId star_edge_v0 = -1;
  EdgeId star_edge_vbar = -1;
};
Detachment detach_vertex(const MetricGraph& g, VertexId v0, HalfEdge e0, double stub_length = 1.0);

// ---- subgraphs -------------------------------------------------------------

struct Subgraph {
  std::vector<VertexId> vertices;
  std::vector<EdgeId> edges;
  std::vector<VertexId> boundary;  // vertices adjacent in the parent to an excluded edge
};

Subgraph subgraph_boundary(const MetricGraph& g, std::vector<VertexId> vertices,
                           std::vector<EdgeId> edges);

}  // namespace loopsoup
