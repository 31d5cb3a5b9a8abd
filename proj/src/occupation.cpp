#include "loopsoup/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "loopsoup/besq.hpp"

namespace loopsoup {

double no_zero_probability(double a, double b, double rho) {
  return -std::expm1(-std::sqrt(a * b) / rho);
}

bool edge_zero_hit(double a, double b, double rho, int n_crossings, Rng& rng) {
  if (n_crossings >= 1) return false;
  if (a <= 0.0 || b <= 0.0) return true;
  return !rng.bernoulli(no_zero_probability(a, b, rho));
}

namespace {

// bisect the absorption position of a sampled BESQ^0-to-zero path down to eps
// by inserting exact bridge values; the extra values are marginalized away
double locate_absorption_path(const std::vector<double>& pos, const std::vector<double>& val,
                              Rng& rng, double eps) {
  size_t i = 0;
  while (i + 1 < val.size() && !(val[i] > 0.0 && val[i + 1] == 0.0)) ++i;
  if (i + 1 >= val.size()) return pos.front();
  double lo = pos[i], hi = pos[i + 1];
  double zlo = val[i];
  while (hi - lo > eps) {
    const double mid = 0.5 * (lo + hi);
    const double z = besq0_bridge_step(zlo, mid - lo, hi - lo, rng);
    if (z == 0.0) hi = mid;
    else { lo = mid; zlo = z; }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

// The trace of the soup on an edge, conditioned on its crossing count: the two
// endpoint excursion fields are BESQ^0 bridges to zero (the far one reversed)
// and the crossings plus interior loops contribute a BESQ^{1+2n} bridge pinned
// at zero. Only this sum, not a plain bridge between a and b, is the
// n-conditional law; the plain bridges reappear as the cosh/sinh mixtures.
EdgeField sample_edge_field(double a, double b, double rho, int n_crossings,
                            bool condition_positive, const std::vector<double>& grid, Rng& rng) {
  const int m = static_cast<int>(grid.size());
  if (n_crossings == 0 && condition_positive && (a <= 0.0 || b <= 0.0)) {
    // vanishing-endpoint limit of the positivity conditioning: the paper's
    // B+(rho, 0, y), a dimension-3 bridge
    EdgeField f;
    f.grid = grid;
    f.crossings = 0;
    BridgeSample s = besq_bridge(3, a, b, rho, grid, rng);
    f.values = std::move(s.values);
    f.interval_zero.assign(m - 1, 0);
    f.zero_hit = a <= 0.0 || b <= 0.0;
    return f;
  }
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    EdgeField f;
    f.grid = grid;
    f.crossings = n_crossings;
    f.interval_zero.assign(m - 1, 0);
    f.values.assign(m, 0.0);

    std::vector<double> side_a(m, 0.0), side_b_rev(m, 0.0);
    if (a > 0.0) side_a = besq0_bridge_to_zero(a, rho, grid, rng);
    if (b > 0.0) side_b_rev = besq0_bridge_to_zero(b, rho, grid, rng);
    for (int i = 0; i < m; ++i) f.values[i] = side_a[i] + side_b_rev[m - 1 - i];

    if (n_crossings >= 1) {
      BridgeSample k = besq_bridge(1 + 2 * n_crossings, 0.0, 0.0, rho, grid, rng);
      for (int i = 0; i < m; ++i) f.values[i] += k.values[i];
      f.zero_hit = a <= 0.0 || b <= 0.0;  // endpoint zeros only
      return f;
    }

    // crossing-free case: the interior part is a single squared scalar bridge
    // whose zero set inside [absorb_a, lift_b] is resolved exactly
    const std::vector<double> bb = sample_scalar_bridge(0.0, 0.0, rho, grid, rng);
    for (int i = 0; i < m; ++i) f.values[i] += bb[i] * bb[i];

    const double eps = 1e-9 * rho;
    const double absorb_a = a > 0.0 ? locate_absorption_path(grid, side_a, rng, eps) : 0.0;
    const double lift_b = rho - (b > 0.0 ? locate_absorption_path(grid, side_b_rev, rng, eps) : 0.0);
    if (absorb_a <= lift_b) {
      // refine the scalar bridge at the two cut points, then flip the exact
      // per-subinterval crossing coins inside the window
      std::vector<double> xs = grid, ys = bb;
      auto insert_point = [&](double s) {
        auto it = std::lower_bound(xs.begin(), xs.end(), s);
        if (it != xs.end() && std::abs(*it - s) < 1e-15) return;
        const size_t j = static_cast<size_t>(it - xs.begin());
        const double y = scalar_bridge_insert(ys[j - 1], ys[j], xs[j - 1], xs[j], s, rng);
        xs.insert(xs.begin() + j, s);
        ys.insert(ys.begin() + j, y);
      };
      insert_point(absorb_a);
      insert_point(lift_b);
      size_t orig = 0;  // index of the covering original interval
      for (size_t i = 0; i + 1 < xs.size(); ++i) {
        while (orig + 2 < grid.size() && grid[orig + 1] <= xs[i] + 1e-15) ++orig;
        if (xs[i + 1] <= absorb_a + 1e-15 || xs[i] >= lift_b - 1e-15) continue;
        const double p = bb_zero_prob(ys[i], ys[i + 1], xs[i + 1] - xs[i]);
        if ((p >= 1.0) || rng.bernoulli(p)) {
          f.interval_zero[orig] = 1;
          f.zero_hit = true;
        }
      }
    }
    if (a <= 0.0 || b <= 0.0) f.zero_hit = true;
    if (condition_positive && f.zero_hit && a > 0.0 && b > 0.0) continue;
    return f;
  }
  throw std::runtime_error("sample_edge_field: positivity rejection budget exceeded");
}

OccupationField sample_occupation(const MetricGraph& g, const DiscreteLoopConfig& config,
                                  const std::vector<double>& vertex_times, int grid_points,
                                  Rng& rng) {
  OccupationField out;
  out.vertex_times = vertex_times;
  const std::vector<int> n = config.crossings(g);
  out.edge_fields.resize(g.edges().size());
  for (const Edge& e : g.edges()) {
    const double a = vertex_times[e.a];
    const double b = vertex_times[e.b];
    EdgeField f = sample_edge_field(a, b, e.length, n[e.id], false,
                                    uniform_grid(e.length, grid_points), rng);
    f.edge = e.id;
    out.edge_fields[e.id] = std::move(f);
  }
  return out;
}

namespace {
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};
}  // namespace

ClusterSet extract_clusters(const MetricGraph& g, const OccupationField& field) {
  const int n = g.vertex_count();
  UnionFind uf(n);
  for (const Edge& e : g.edges()) {
    const EdgeField& f = field.edge_fields[e.id];
    if (!f.zero_hit && field.vertex_times[e.a] > 0.0 && field.vertex_times[e.b] > 0.0)
      uf.unite(e.a, e.b);
  }
  ClusterSet out;
  out.vertex_cluster.assign(n, -1);
  out.edge_cluster.assign(g.edges().size(), -1);
  std::vector<int> root_to_cluster(n, -1);
  for (int v = 0; v < n; ++v) {
    if (field.vertex_times[v] <= 0.0) continue;
    const int r = uf.find(v);
    if (root_to_cluster[r] < 0) {
      root_to_cluster[r] = out.count++;
      out.cluster_edges.emplace_back();
      out.cluster_vertices.emplace_back();
    }
    out.vertex_cluster[v] = root_to_cluster[r];
    out.cluster_vertices[root_to_cluster[r]].push_back(v);
  }
  for (const Edge& e : g.edges()) {
    const EdgeField& f = field.edge_fields[e.id];
    if (!f.zero_hit && field.vertex_times[e.a] > 0.0 && field.vertex_times[e.b] > 0.0) {
      const int c = out.vertex_cluster[e.a];
      out.edge_cluster[e.id] = c;
      out.cluster_edges[c].push_back(e.id);
    }
  }
  return out;
}

// ---- independent trace construction -----------------------------------------

TraceOracleSample edge_trace_zero_oracle(double a, double b, double rho,
                                         const std::vector<double>& grid, Rng& rng) {
  const EdgeField f = sample_edge_field(a, b, rho, 0, false, grid, rng);
  TraceOracleSample out;
  out.no_zero = !f.zero_hit;
  out.values = f.values;
  return out;
}

void dump_field_csv(const MetricGraph& g, const OccupationField& field, const std::string& path) {
  std::ofstream outf(path);
  outf << "edge,s,value\n";
  for (const EdgeField& f : field.edge_fields) {
    for (size_t i = 0; i < f.grid.size(); ++i)
      outf << f.edge << ',' << f.grid[i] << ',' << f.values[i] << '\n';
  }
}

}  // namespace loopsoup
