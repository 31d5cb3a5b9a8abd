#include "loopsoup/currents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace loopsoup {

std::string ParityConfig::bitstring() const {
  std::string s(alpha.size(), '0');
  for (size_t i = 0; i < alpha.size(); ++i) s[i] = alpha[i] ? '1' : '0';
  return s;
}

namespace {
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};
}  // namespace

CycleBasis cycle_basis(const MetricGraph& g, const std::vector<EdgeId>& edges) {
  std::vector<EdgeId> sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  UnionFind uf(g.vertex_count());
  CycleBasis basis;
  for (EdgeId e : sorted) {
    const Edge& ed = g.edge(e);
    if (ed.a != ed.b && uf.unite(ed.a, ed.b)) basis.tree_edges.push_back(e);
    else basis.chords.push_back(e);
  }
  return basis;
}

std::optional<ParityConfig> admissible_with_parity(const MetricGraph& g,
                                                   const std::vector<EdgeId>& edges,
                                                   const std::vector<int>& vertex_parity,
                                                   Rng& rng) {
  ParityConfig cfg;
  cfg.alpha.assign(g.edges().size(), 0);
  const CycleBasis basis = cycle_basis(g, edges);
  for (EdgeId e : basis.chords) cfg.alpha[e] = rng.bernoulli(0.5) ? 1 : 0;

  // residual parity each vertex still owes after the chord choices
  std::vector<int> owe(g.vertex_count(), 0);
  for (int v = 0; v < g.vertex_count(); ++v) owe[v] = vertex_parity[v] % 2;
  for (EdgeId e : basis.chords) {
    if (!cfg.alpha[e]) continue;
    const Edge& ed = g.edge(e);
    if (ed.a != ed.b) {
      owe[ed.a] ^= 1;
      owe[ed.b] ^= 1;
    }
  }
  // peel the forest leaf-up
  std::vector<std::vector<EdgeId>> tree_at(g.vertex_count());
  std::vector<int> deg(g.vertex_count(), 0);
  for (EdgeId e : basis.tree_edges) {
    tree_at[g.edge(e).a].push_back(e);
    tree_at[g.edge(e).b].push_back(e);
    ++deg[g.edge(e).a];
    ++deg[g.edge(e).b];
  }
  std::vector<char> edge_done(g.edges().size(), 0);
  std::vector<VertexId> leaves;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (deg[v] == 1) leaves.push_back(v);
  while (!leaves.empty()) {
    const VertexId v = leaves.back();
    leaves.pop_back();
    EdgeId pending = -1;
    for (EdgeId e : tree_at[v])
      if (!edge_done[e]) pending = e;
    if (pending < 0) continue;
    cfg.alpha[pending] = owe[v];
    edge_done[pending] = 1;
    const Edge& ed = g.edge(pending);
    const VertexId u = ed.a == v ? ed.b : ed.a;
    owe[v] = 0;
    if (cfg.alpha[pending]) owe[u] ^= 1;
    if (--deg[u] == 1) leaves.push_back(u);
    deg[v] = 0;
  }
  // solvable iff nothing is still owed (per-component parity sums even)
  for (int v = 0; v < g.vertex_count(); ++v)
    if (owe[v]) return std::nullopt;
  return cfg;
}

ParityConfig admissible_uniform(const MetricGraph& g, const ClusterSet& clusters, Rng& rng) {
  std::vector<EdgeId> live;
  for (const auto& cluster : clusters.cluster_edges)
    live.insert(live.end(), cluster.begin(), cluster.end());
  std::vector<int> zero(g.vertex_count(), 0);
  auto cfg = admissible_with_parity(g, live, zero, rng);
  if (!cfg) throw std::logic_error("admissible_uniform: homogeneous system unsolvable");
  return *cfg;
}

uint64_t count_admissible_edges(const MetricGraph& g, const std::vector<EdgeId>& edges) {
  const CycleBasis basis = cycle_basis(g, edges);
  if (basis.dimension() >= 63) throw std::overflow_error("count_admissible: dimension too large");
  return uint64_t{1} << basis.dimension();
}

uint64_t count_admissible(const MetricGraph& g, const ClusterSet& clusters) {
  uint64_t total = 1;
  for (const auto& cluster : clusters.cluster_edges) {
    const uint64_t c = count_admissible_edges(g, cluster);
    if (total > UINT64_MAX / c) throw std::overflow_error("count_admissible: overflow");
    total *= c;
  }
  return total;
}

ParityConfig parity_of_config(const DiscreteLoopConfig& config, const MetricGraph& g) {
  const std::vector<int> n = config.crossings(g);
  ParityConfig cfg;
  cfg.alpha.assign(g.edges().size(), 0);
  for (size_t e = 0; e < n.size(); ++e) cfg.alpha[e] = n[e] % 2;
  return cfg;
}

ParityDistribution current_parity_weights(const MetricGraph& g, const std::vector<EdgeId>& edges,
                                          const std::vector<double>& beta) {
  const CycleBasis basis = cycle_basis(g, edges);
  if (basis.dimension() > 20) throw std::invalid_argument("current_parity_weights: state space too large");
  ParityDistribution out;
  double total = 0.0;
  // every admissible config is a xor of chord-generated cycles
  for (uint64_t mask = 0; mask < (uint64_t{1} << basis.dimension()); ++mask) {
    std::vector<int> parity(g.vertex_count(), 0);
    ParityConfig cfg;
    cfg.alpha.assign(g.edges().size(), 0);
    for (int i = 0; i < basis.dimension(); ++i) {
      if (!(mask & (uint64_t{1} << i))) continue;
      const EdgeId e = basis.chords[i];
      cfg.alpha[e] ^= 1;
      const Edge& ed = g.edge(e);
      if (ed.a != ed.b) {
        parity[ed.a] ^= 1;
        parity[ed.b] ^= 1;
      }
    }
    // complete on the tree deterministically (no randomness: unique solution)
    Rng dummy(0, 0, 0);
    std::vector<EdgeId> tree_only = basis.tree_edges;
    std::vector<int> owed(parity);
    auto completed = admissible_with_parity(g, tree_only, owed, dummy);
    if (!completed) continue;
    for (EdgeId e : basis.tree_edges) cfg.alpha[e] = completed->alpha[e];
    double w = 1.0;
    for (size_t i = 0; i < edges.size(); ++i) {
      const EdgeId e = edges[i];
      w *= cfg.alpha[e] ? std::sinh(beta[i]) : std::cosh(beta[i]);
    }
    out.support.push_back(std::move(cfg));
    out.prob.push_back(w);
    total += w;
  }
  for (double& p : out.prob) p /= total;
  return out;
}

}  // namespace loopsoup
