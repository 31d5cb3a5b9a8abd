#include "loopsoup/harmonic.hpp"

#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace loopsoup {

std::vector<double> vertex_rates(const MetricGraph& g) {
  return vertex_rates_masked(g, {});
}

std::vector<double> vertex_rates_masked(const MetricGraph& g, const std::vector<char>& edge_removed) {
  std::vector<double> a(g.vertex_count(), 0.0);
  for (int v = 0; v < g.vertex_count(); ++v)
    for (HalfEdge h : g.half_edges(v))
      if (edge_removed.empty() || !edge_removed[h.edge]) a[v] += 1.0 / g.edge(h.edge).length;
  return a;
}

std::vector<double> hitting_values(const MetricGraph& g, const std::vector<char>& edge_removed,
                                   const std::map<VertexId, double>& boundary) {
  const int n = g.vertex_count();
  std::vector<double> h(n, 0.0);
  std::vector<char> is_boundary(n, 0);
  for (auto& [v, val] : boundary) {
    is_boundary[v] = 1;
    h[v] = val;
  }
  auto allowed = [&](EdgeId e) { return edge_removed.empty() || !edge_removed[e]; };

  // restrict the system to interior vertices that can reach the boundary
  std::vector<char> reach(n, 0);
  {
    std::vector<VertexId> stack;
    for (auto& [v, val] : boundary) {
      reach[v] = 1;
      stack.push_back(v);
    }
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      for (HalfEdge he : g.half_edges(v)) {
        if (!allowed(he.edge)) continue;
        const VertexId u = g.tip_of(he);
        if (!reach[u]) {
          reach[u] = 1;
          stack.push_back(u);
        }
      }
    }
  }

  std::vector<int> idx(n, -1);
  std::vector<VertexId> interior;
  for (int v = 0; v < n; ++v) {
    if (!is_boundary[v] && reach[v]) {
      idx[v] = static_cast<int>(interior.size());
      interior.push_back(v);
    }
  }
  if (interior.empty()) return h;

  const int m = static_cast<int>(interior.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    const VertexId v = interior[i];
    for (HalfEdge he : g.half_edges(v)) {
      if (!allowed(he.edge)) continue;
      const double c = 1.0 / g.edge(he.edge).length;
      const VertexId u = g.tip_of(he);
      A(i, i) += c;
      if (is_boundary[u]) rhs(i) += c * h[u];
      else A(i, idx[u]) -= c;  // self-loop halves cancel on the diagonal
    }
  }
  Eigen::VectorXd x = A.partialPivLu().solve(rhs);
  for (int i = 0; i < m; ++i) h[interior[i]] = x(i);
  return h;
}

double return_probability(const MetricGraph& g, VertexId v, const std::vector<VertexId>& killed_at) {
  std::vector<char> killed(g.vertex_count(), 0);
  bool has_sink = false;
  for (VertexId k : killed_at) {
    killed[k] = 1;
    has_sink |= g.is_sink(k);
  }
  if (!has_sink) throw std::invalid_argument("return_probability: kill set must contain the sink");
  return return_probability_masked(g, v, killed, {});
}

double return_probability_masked(const MetricGraph& g, VertexId v,
                                 const std::vector<char>& killed, const std::vector<char>& edge_removed) {
  std::map<VertexId, double> boundary;
  for (int u = 0; u < g.vertex_count(); ++u)
    if (killed[u] && u != v) boundary[u] = 0.0;
  boundary[v] = 1.0;
  const std::vector<double> h = hitting_values(g, edge_removed, boundary);
  double num = 0.0, a = 0.0;
  for (HalfEdge he : g.half_edges(v)) {
    if (!edge_removed.empty() && edge_removed[he.edge]) continue;
    const double c = 1.0 / g.edge(he.edge).length;
    a += c;
    num += c * h[g.tip_of(he)];
  }
  return a > 0.0 ? num / a : 0.0;
}

ExcursionKernel excursion_kernel(const MetricGraph& g, VertexId v,
                                 const std::vector<char>& edge_removed,
                                 const std::vector<VertexId>& stops) {
  ExcursionKernel out;
  out.source = v;
  for (VertexId w : stops) out.mass[w] = 0.0;
  out.mass[v] = 0.0;
  // one harmonic solve per target; the h-vector for target w has boundary 1
  // at w and 0 at the other absorbing vertices
  std::vector<VertexId> absorbing = stops;
  if (std::find(absorbing.begin(), absorbing.end(), v) == absorbing.end()) absorbing.push_back(v);
  for (auto& [w, mass] : out.mass) {
    std::map<VertexId, double> boundary;
    for (VertexId b : absorbing) boundary[b] = (b == w ? 1.0 : 0.0);
    const std::vector<double> h = hitting_values(g, edge_removed, boundary);
    double m = 0.0;
    for (HalfEdge he : g.half_edges(v)) {
      if (!edge_removed.empty() && edge_removed[he.edge]) continue;
      m += h[g.tip_of(he)] / (2.0 * g.edge(he.edge).length);
    }
    mass = m;
  }
  return out;
}

std::vector<double> green_function(const MetricGraph& g) {
  const int n = g.vertex_count();
  std::vector<int> idx(n, -1);
  std::vector<VertexId> interior;
  for (int v = 0; v < n; ++v) {
    if (!g.is_sink(v)) {
      idx[v] = static_cast<int>(interior.size());
      interior.push_back(v);
    }
  }
  const int m = static_cast<int>(interior.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (const Edge& e : g.edges()) {
    if (e.a == e.b) continue;  // self-loops drop out of the quadratic form
    const double c = 1.0 / e.length;
    if (idx[e.a] >= 0) lap(idx[e.a], idx[e.a]) += c;
    if (idx[e.b] >= 0) lap(idx[e.b], idx[e.b]) += c;
    if (idx[e.a] >= 0 && idx[e.b] >= 0) {
      lap(idx[e.a], idx[e.b]) -= c;
      lap(idx[e.b], idx[e.a]) -= c;
    }
  }
  Eigen::MatrixXd inv = lap.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
  std::vector<double> green(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      green[static_cast<size_t>(interior[i]) * n + interior[j]] = 2.0 * 0.5 * (inv(i, j) + inv(j, i));
  return green;
}

PotentialTable make_potential_table(const MetricGraph& g) {
  PotentialTable t;
  t.n = g.vertex_count();
  t.rates = vertex_rates(g);
  t.green = green_function(g);
  t.return_prob.assign(t.n, 0.0);
  for (int v = 0; v < t.n; ++v)
    if (!g.is_sink(v)) t.return_prob[v] = return_probability(g, v, {g.sink()});
  return t;
}

void dump_matrix_csv(const std::vector<double>& m, int n, const std::string& path) {
  std::ofstream out(path);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out << m[static_cast<size_t>(i) * n + j] << (j + 1 < n ? ',' : '\n');
  }
}

}  // namespace loopsoup
