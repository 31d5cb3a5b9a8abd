#include "loopsoup/gff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace loopsoup {

GffSampler make_gff_sampler(const MetricGraph& g) {
  const std::vector<double> green = green_function(g);
  GffSampler s;
  s.n = g.vertex_count();
  s.sink = g.sink();
  for (int v = 0; v < s.n; ++v)
    if (!g.is_sink(v)) s.interior.push_back(v);
  const int m = static_cast<int>(s.interior.size());
  Eigen::MatrixXd cov(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      cov(i, j) = green[static_cast<size_t>(s.interior[i]) * s.n + s.interior[j]];
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("make_gff_sampler: G not positive definite");
  Eigen::MatrixXd lower = llt.matrixL();
  s.chol.assign(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) s.chol[static_cast<size_t>(i) * m + j] = lower(i, j);
  return s;
}

std::vector<double> sample_gff(const GffSampler& s, Rng& rng) {
  const int m = static_cast<int>(s.interior.size());
  std::vector<double> z(m);
  for (double& x : z) x = rng.normal();
  std::vector<double> phi(s.n, 0.0);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= i; ++j) acc += s.chol[static_cast<size_t>(i) * m + j] * z[j];
    phi[s.interior[i]] = acc;
  }
  return phi;
}

std::vector<int> lupu_signs(const MetricGraph& g, const ClusterSet& clusters, Rng& rng) {
  std::vector<int> cluster_sign(clusters.count);
  for (int c = 0; c < clusters.count; ++c) cluster_sign[c] = rng.bernoulli(0.5) ? 1 : -1;
  std::vector<int> sign(g.vertex_count(), 0);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (clusters.vertex_cluster[v] >= 0) sign[v] = cluster_sign[clusters.vertex_cluster[v]];
  return sign;
}

// ---- exploration -------------------------------------------------------------

namespace {

struct EdgeProgress {
  int state = 0;        // 0 unexplored, 1 done, 2 cut
  int from_dir = 0;     // explored starting from a (0) or b (1)
  double cut_pos = 0.0; // distance from the exploring side
};

struct Explorer {
  const MetricGraph& g;
  std::vector<EdgeProgress> progress;
  std::vector<char> vertex_explored;
  std::vector<double> vertex_time;  // local time at explored vertices
  std::vector<VertexId> explored_order;

  explicit Explorer(const MetricGraph& g_)
      : g(g_), progress(g_.edges().size()), vertex_explored(g_.vertex_count(), 0),
        vertex_time(g_.vertex_count(), 0.0) {}

  // drift kernel at a frontier sitting `upos` into edge e explored from vfrom;
  // returns 2 sum_b H(F,b) (X_b - x_frontier)
  double drift_at(EdgeId cur_edge, VertexId vfrom, double upos, double x_frontier) const {
    const int n = g.vertex_count();
    const VertexId frontier = n;  // one extra vertex
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
      if (e.id == cur_edge) continue;
      const EdgeProgress& pr = progress[e.id];
      if (pr.state == 0) {
        edges.push_back(Edge{-1, e.a, e.b, e.length, false});
      } else if (pr.state == 2) {
        // unexplored remainder, root identified with the sink
        const double rem = e.length - pr.cut_pos;
        if (rem <= 0.0) continue;
        const VertexId far = pr.from_dir == 0 ? e.b : e.a;
        if (vertex_explored[far]) continue;  // both sides seen, nothing left
        edges.push_back(Edge{-1, g.sink(), far, rem, false});
      }
    }
    const Edge& ce = g.edge(cur_edge);
    const VertexId vto = ce.a == vfrom ? ce.b : ce.a;
    const double rem = ce.length - upos;
    if (rem > 0.0) edges.push_back(Edge{-1, frontier, vto, rem, false});

    MetricGraph refined(n + 1, g.sink(), std::move(edges), {}, false);
    // stop set: explored vertices still bordering the unexplored part + sink
    std::vector<VertexId> stops;
    for (VertexId v = 0; v < n; ++v) {
      if (!vertex_explored[v] || v == g.sink()) continue;
      if (!refined.half_edges(v).empty()) stops.push_back(v);
    }
    stops.push_back(g.sink());
    const std::vector<char> no_mask;
    ExcursionKernel kernel = excursion_kernel(refined, frontier, no_mask, stops);
    double drift = 0.0;
    for (const auto& [b, mass] : kernel.mass) {
      if (b == frontier) continue;
      const double xb = b == g.sink() ? 0.0 : std::sqrt(vertex_time[b]);
      drift += mass * (xb - x_frontier);
    }
    return 2.0 * drift;
  }

  // next unexplored edge per the deterministic order: current vertex first,
  // then earlier explored vertices
  std::pair<VertexId, EdgeId> next_edge(VertexId prefer) const {
    auto probe = [&](VertexId v) -> EdgeId {
      for (HalfEdge he : g.half_edges(v))
        if (progress[he.edge].state == 0) return he.edge;
      return -1;
    };
    if (prefer >= 0 && vertex_explored[prefer]) {
      const EdgeId e = probe(prefer);
      if (e >= 0) return {prefer, e};
    }
    for (VertexId v : explored_order) {
      const EdgeId e = probe(v);
      if (e >= 0) return {v, e};
    }
    return {-1, -1};
  }
};

}  // namespace

ExplorationResult explore_cluster(const MetricGraph& g, const OccupationField& field,
                                  VertexId start) {
  ExplorationResult out;
  if (field.vertex_times[start] <= 0.0) {
    out.start_dead = true;
    return out;
  }
  Explorer ex(g);
  ex.vertex_explored[start] = 1;
  ex.vertex_time[start] = field.vertex_times[start];
  ex.explored_order.push_back(start);

  double t = 0.0;
  VertexId cur = start;
  for (;;) {
    auto [v, e] = ex.next_edge(cur);
    if (e < 0) break;
    const Edge& ed = g.edge(e);
    const EdgeField& f = field.edge_fields[e];
    const bool forward = ed.a == v;
    const int m = static_cast<int>(f.grid.size());
    auto val = [&](int j) { return forward ? f.values[j] : f.values[m - 1 - j]; };
    auto zero_flag = [&](int j) {  // flag of interval [j, j+1] in walk orientation
      return forward ? f.interval_zero[j] : f.interval_zero[m - 2 - j];
    };
    ex.progress[e].state = 1;
    ex.progress[e].from_dir = forward ? 0 : 1;
    bool cut = false;
    for (int j = 0; j + 1 < m && !cut; ++j) {
      const double h = f.grid[j + 1] - f.grid[j];
      const double upos = std::max(f.grid[j], 1e-6 * h);
      const double x = std::sqrt(std::max(val(j), 0.0));
      ExplorationStep step;
      step.t = t;
      step.dt = h;
      step.x = x;
      step.segment = out.segments;
      step.drift = ex.drift_at(e, v, upos, x);
      if (zero_flag(j)) {
        cut = true;
        ex.progress[e].state = 2;
        ex.progress[e].cut_pos = f.grid[j] + 0.5 * h;
        step.dx = -x;
        step.dt = 0.5 * h;
        step.interior = false;
        t += 0.5 * h;
      } else {
        step.dx = std::sqrt(std::max(val(j + 1), 0.0)) - x;
        step.interior = true;
        t += h;
      }
      out.steps.push_back(step);
    }
    ++out.segments;
    if (!cut) {
      const VertexId far = forward ? ed.b : ed.a;
      if (far == g.sink()) {
        // a positive field cannot reach the sink; treated as a cut at the end
        ex.progress[e].state = 2;
        ex.progress[e].cut_pos = ed.length;
      } else if (!ex.vertex_explored[far]) {
        ex.vertex_explored[far] = 1;
        ex.vertex_time[far] = field.vertex_times[far];
        ex.explored_order.push_back(far);
      }
      cur = far == g.sink() ? v : far;
    } else {
      cur = v;
    }
  }
  out.zeta = t;
  return out;
}

ExplorationResult explore_euler(const MetricGraph& g, VertexId start, double x0, int grid_points,
                                Rng& rng) {
  ExplorationResult out;
  Explorer ex(g);
  ex.vertex_explored[start] = 1;
  ex.vertex_time[start] = x0 * x0;
  ex.explored_order.push_back(start);

  double t = 0.0;
  VertexId cur = start;
  for (;;) {
    auto [v, e] = ex.next_edge(cur);
    if (e < 0) break;
    const Edge& ed = g.edge(e);
    const bool forward = ed.a == v;
    const int m = grid_points;
    const double h = ed.length / (m - 1);
    ex.progress[e].state = 1;
    ex.progress[e].from_dir = forward ? 0 : 1;
    double L = ex.vertex_time[v];
    bool cut = false;
    for (int j = 0; j + 1 < m && !cut; ++j) {
      const double upos = std::max(j * h, 1e-6 * h);
      const double x = std::sqrt(std::max(L, 0.0));

      // refined kernel gives both the drift and the Poisson excursion counts
      const int n = g.vertex_count();
      double total_mass = 0.0;
      long excursions = 0;
      {
        // reuse the drift machinery but also need per-target masses; inline it
        const VertexId frontier = n;
        std::vector<Edge> edges;
        for (const Edge& oe : g.edges()) {
          if (oe.id == e) continue;
          const EdgeProgress& pr = ex.progress[oe.id];
          if (pr.state == 0) edges.push_back(Edge{-1, oe.a, oe.b, oe.length, false});
          else if (pr.state == 2) {
            const double rem = oe.length - pr.cut_pos;
            const VertexId far = pr.from_dir == 0 ? oe.b : oe.a;
            if (rem > 0.0 && !ex.vertex_explored[far])
              edges.push_back(Edge{-1, g.sink(), far, rem, false});
          }
        }
        const VertexId vto = ed.a == v ? ed.b : ed.a;
        const double rem = ed.length - upos;
        if (rem > 0.0) edges.push_back(Edge{-1, frontier, vto, rem, false});
        MetricGraph refined(n + 1, g.sink(), std::move(edges), {}, false);
        std::vector<VertexId> stops;
        for (VertexId u = 0; u < n; ++u)
          if (ex.vertex_explored[u] && u != g.sink() && !refined.half_edges(u).empty())
            stops.push_back(u);
        stops.push_back(g.sink());
        ExcursionKernel kernel = excursion_kernel(refined, frontier, {}, stops);
        for (const auto& [b, mass] : kernel.mass) {
          if (b == frontier) continue;
          total_mass += mass;
          const double xb = b == g.sink() ? 0.0 : std::sqrt(ex.vertex_time[b]);
          if (xb > 0.0) excursions += rng.poisson(2.0 * mass * x * xb);
        }
      }
      ExplorationStep step;
      step.t = t;
      step.dt = h;
      step.x = x;
      step.segment = out.segments;
      step.drift = 0.0;  // not used on the euler route
      const double dw = rng.normal(0.0, std::sqrt(h));
      const double L_new =
          L + 2.0 * std::sqrt(std::max(L, 0.0)) * dw - 4.0 * L * total_mass * h +
          (2.0 * excursions + 1.0) * h;
      if (L_new <= 0.0) {
        cut = true;
        ex.progress[e].state = 2;
        ex.progress[e].cut_pos = j * h + 0.5 * h;
        step.dx = -x;
        step.dt = 0.5 * h;
        step.interior = false;
        t += 0.5 * h;
        L = 0.0;
      } else {
        step.dx = std::sqrt(L_new) - x;
        step.interior = true;
        t += h;
        L = L_new;
      }
      out.steps.push_back(step);
    }
    ++out.segments;
    if (!cut) {
      const VertexId far = forward ? ed.b : ed.a;
      if (far == g.sink()) {
        ex.progress[e].state = 2;
        ex.progress[e].cut_pos = ed.length;
        cur = v;
      } else {
        if (!ex.vertex_explored[far]) {
          ex.vertex_explored[far] = 1;
          ex.vertex_time[far] = L;
          ex.explored_order.push_back(far);
        }
        cur = far;
      }
    } else {
      cur = v;
    }
  }
  out.zeta = t;
  return out;
}

void dump_trajectory_csv(const ExplorationResult& r, const std::string& path) {
  std::ofstream out(path);
  out << "t,x,drift,segment\n";
  for (const ExplorationStep& s : r.steps)
    out << s.t << ',' << s.x << ',' << s.drift << ',' << s.segment << '\n';
}

}  // namespace loopsoup
