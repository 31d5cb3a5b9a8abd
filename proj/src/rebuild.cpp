#include "loopsoup/rebuild.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "loopsoup/one_dim.hpp"

namespace loopsoup {

namespace {

// one end of one crossing copy, sitting at a vertex
struct CrossingEnd {
  EdgeId edge = -1;
  int copy = 0;
  int side = 0;  // 0: the end at edge.a, 1: at edge.b
};

}  // namespace

ReconstructedLoops glue(const MetricGraph& g, const std::vector<int>& crossings, Rng& rng) {
  ReconstructedLoops out;
  // ends per vertex (self-loops contribute both sides)
  std::vector<std::vector<CrossingEnd>> ends(g.vertex_count());
  for (const Edge& e : g.edges()) {
    for (int c = 0; c < crossings[e.id]; ++c) {
      ends[e.a].push_back({e.id, c, 0});
      ends[e.b].push_back({e.id, c, 1});
    }
  }
  // global indexing of (edge, copy, side) for cycle tracing
  auto end_key = [&](const CrossingEnd& ce) {
    return (static_cast<long>(ce.edge) << 24) | (ce.copy << 1) | ce.side;
  };
  std::map<long, long> partner_key;  // end -> glued end at the same vertex

  for (int v = 0; v < g.vertex_count(); ++v) {
    auto& local = ends[v];
    if (local.size() % 2 != 0) throw std::invalid_argument("glue: odd crossing parity at a vertex");
    const int kv = static_cast<int>(local.size() / 2);
    VertexGluing plan;
    plan.vertex = v;
    plan.k = kv;
    // uniform perfect matching of the local ends
    std::vector<int> open(local.size());
    for (size_t i = 0; i < local.size(); ++i) open[i] = static_cast<int>(i);
    while (!open.empty()) {
      const int a = open.back();
      open.pop_back();
      const size_t pick = rng.uniform_index(open.size());
      const int b = open[pick];
      open.erase(open.begin() + pick);
      plan.pairing.emplace_back(a, b);
      partner_key[end_key(local[a])] = end_key(local[b]);
      partner_key[end_key(local[b])] = end_key(local[a]);
    }
    // local-time labelling: beta(1/2, k) share for point loops, PD(0, 1/2)
    // parts inside it, uniform splits of the rest attached to the pairs
    plan.beta_share = kv == 0 ? 1.0 : rng.beta(0.5, static_cast<double>(kv));
    if (!g.is_sink(v)) {
      double residual = plan.beta_share;
      while (residual > 1e-9) {
        const double u = rng.beta(1.0, 0.5);
        plan.point_loop_masses.push_back(residual * u);
        residual *= (1.0 - u);
      }
    }
    for (int i = 0; i + 1 < kv; ++i)
      plan.split_points.push_back(rng.uniform(plan.beta_share, 1.0));
    std::sort(plan.split_points.begin(), plan.split_points.end());
    out.point_loops.push_back(plan.point_loop_masses);  // aligned with vertex ids
    out.plan.per_vertex.push_back(std::move(plan));
  }

  // trace cycles: traverse a crossing, hop through the vertex gluing, repeat
  std::map<long, char> visited;
  for (const Edge& e : g.edges()) {
    for (int c = 0; c < crossings[e.id]; ++c) {
      const long start = end_key({e.id, c, 0});
      if (visited.count(start)) continue;
      std::vector<HalfEdge> steps;
      long cur = start;
      for (;;) {
        const EdgeId ce = static_cast<EdgeId>(cur >> 24);
        const int side = static_cast<int>(cur & 1);
        const long other = (cur ^ 1);
        visited[cur] = 1;
        visited[other] = 1;
        // traversing from `side` to the opposite side crosses the edge rooted
        // at the side's endpoint
        steps.push_back(HalfEdge{ce, side});
        auto it = partner_key.find(other);
        if (it == partner_key.end()) throw std::logic_error("glue: dangling crossing end");
        cur = it->second;
        if (cur == start) break;
      }
      out.loops.loops[canonical_loop(g, std::move(steps))] += 1;
    }
  }
  return out;
}

double edge_time_change(const EdgeField& f) {
  if (f.zero_hit) return std::numeric_limits<double>::infinity();
  for (double v : f.values)
    if (v < 1e-12) return std::numeric_limits<double>::infinity();
  double t = 0.0;
  for (size_t i = 0; i + 1 < f.grid.size(); ++i)
    t += 0.5 * (f.grid[i + 1] - f.grid[i]) * (1.0 / f.values[i] + 1.0 / f.values[i + 1]);
  return t;
}

FieldReconstruction reconstruct_from_field(const MetricGraph& g, const OccupationField& field,
                                           long coalescent_n0, Rng& rng) {
  FieldReconstruction out;
  const ClusterSet clusters = extract_clusters(g, field);
  out.parity = admissible_uniform(g, clusters, rng);
  out.crossings.assign(g.edges().size(), 0);
  for (const Edge& e : g.edges()) {
    if (clusters.edge_cluster[e.id] < 0) continue;  // dead edges carry nothing
    const double T = edge_time_change(field.edge_fields[e.id]);
    const int alpha = out.parity.alpha[e.id];
    if (std::isinf(T)) continue;
    const long blocks = kingman_killed(T, alpha ? 3.0 : 1.0, coalescent_n0, rng);
    out.crossings[e.id] = static_cast<int>(2 * blocks + alpha);
  }
  out.loops = glue(g, out.crossings, rng);
  return out;
}

}  // namespace loopsoup
