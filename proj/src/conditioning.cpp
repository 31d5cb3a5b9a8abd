#include "loopsoup/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loopsoup/currents.hpp"
#include "loopsoup/occupation.hpp"

namespace loopsoup {

void decompose_outside_trace(const StarGraph& star, const DiscreteLoopConfig& config,
                             std::map<BoundaryPair, int>& pairs, int& outside_loops) {
  const MetricGraph& g = star.graph;
  std::vector<char> marked(g.vertex_count(), 0);  // W or boundary
  for (VertexId v : star.star_vertices) marked[v] = 1;
  for (VertexId v : star.replicas) marked[v] = 1;

  for (const auto& [loop, count] : config.loops) {
    // indices of steps rooted at a marked vertex
    std::vector<size_t> marks;
    const auto& steps = loop.steps;
    for (size_t i = 0; i < steps.size(); ++i)
      if (marked[g.root_of(steps[i])]) marks.push_back(i);
    if (marks.empty()) {
      outside_loops += count;
      continue;
    }
    // segments between consecutive marked visits (cyclically)
    for (size_t j = 0; j < marks.size(); ++j) {
      const size_t from = marks[j];
      const size_t to = marks[(j + 1) % marks.size()];
      const VertexId a = g.root_of(steps[from]);
      const VertexId b = g.root_of(steps[to]);
      // the segment uses the steps from..to-1 (cyclic); it is an excursion of
      // the outside trace iff it never uses a star edge
      bool uses_star = false;
      size_t i = from;
      do {
        if (star.is_star_edge(steps[i].edge)) uses_star = true;
        i = (i + 1) % steps.size();
      } while (i != to && !uses_star);
      if (uses_star) continue;
      pairs[make_pair_key(a, b)] += count;
    }
  }
}

std::optional<NSample> sample_n_rejection(const StarGraph& star, const ConditionWindow& window,
                                          const SoupSampler& sampler, Rng& rng,
                                          long max_attempts, RejectionStats* stats) {
  const MetricGraph& g = star.graph;
  const std::vector<double> rates = sampler.rates;
  for (long attempt = 1; attempt <= max_attempts; ++attempt) {
    if (stats) ++stats->attempts;
    DiscreteLoopConfig config = sampler.sample(rng);
    const std::vector<int> k = config.visit_counts(g);
    const std::vector<int> crossings = config.crossings(g);

    // local times; caps first, they are the cheap rejection
    std::vector<double> times(g.vertex_count(), 0.0);
    bool ok = true;
    for (VertexId v : star.star_vertices) {
      times[v] = rng.gamma(k[v] + 0.5, 0.5 * rates[v]);
      auto it = window.caps.find(v);
      if (it != window.caps.end() && times[v] > it->second) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (g.is_sink(v) || star.is_star_vertex(v)) continue;
      times[v] = rng.gamma(k[v] + 0.5, 0.5 * rates[v]);
    }
    // the no-zero event on every star edge
    for (EdgeId e : star.star_edges) {
      const Edge& ed = g.edge(e);
      if (edge_zero_hit(times[ed.a], times[ed.b], ed.length, crossings[e], rng)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    NSample out;
    out.k = k;
    out.local_times = times;
    out.star_crossings.reserve(star.star_edges.size());
    for (EdgeId e : star.star_edges) out.star_crossings.push_back(crossings[e]);
    decompose_outside_trace(star, config, out.pair_excursions, out.outside_loops);
    out.attempts = attempt;
    if (stats) ++stats->accepted;
    return out;
  }
  return std::nullopt;
}

// ---- direct sampler ----------------------------------------------------------

NDirectContext make_n_direct_context(const StarGraph& star) {
  const MetricGraph& g = star.graph;
  // (W, E(W)) must be connected for the independent-Poisson description
  {
    std::vector<EdgeId> ew = star.star_edges;
    CycleBasis basis = cycle_basis(g, ew);
    const size_t vertices_touched = [&] {
      std::vector<char> seen(g.vertex_count(), 0);
      size_t n = 0;
      for (EdgeId e : ew) {
        for (VertexId v : {g.edge(e).a, g.edge(e).b})
          if (!seen[v]) {
            seen[v] = 1;
            ++n;
          }
      }
      return n;
    }();
    if (basis.tree_edges.size() + 1 != vertices_touched)
      throw std::invalid_argument("sample_n_direct: (W, E(W)) is not connected");
  }
  NDirectContext ctx;
  ctx.star = &star;
  ctx.boundary = star.replicas;
  std::sort(ctx.boundary.begin(), ctx.boundary.end());
  ctx.star_edge_mask.assign(g.edges().size(), 0);
  for (EdgeId e : star.star_edges) ctx.star_edge_mask[e] = 1;
  ctx.rates = vertex_rates(g);

  // absorbing set: boundary + sink; one harmonic vector per absorbing target
  std::vector<VertexId> stops = ctx.boundary;
  stops.push_back(g.sink());
  for (VertexId target : stops) {
    std::map<VertexId, double> bc;
    for (VertexId s : stops) bc[s] = (s == target ? 1.0 : 0.0);
    for (VertexId w : star.star_vertices) bc[w] = 0.0;  // isolated once stubs are removed
    ctx.hit_vectors[target] = hitting_values(g, ctx.star_edge_mask, bc);
  }
  for (VertexId v : ctx.boundary) {
    ExcursionKernel kernel = excursion_kernel(g, v, ctx.star_edge_mask, stops);
    for (auto& [w, mass] : kernel.mass) {
      if (w == g.sink()) continue;
      if (w == v) ctx.return_mass[v] = mass;
      else if (std::binary_search(ctx.boundary.begin(), ctx.boundary.end(), w))
        ctx.pair_mass[make_pair_key(v, w)] = mass;
    }
  }
  // loops that stay outside E(W): soup with sink at the boundary
  std::vector<VertexId> sinks = ctx.boundary;
  for (VertexId w : star.star_vertices) sinks.push_back(w);
  ctx.outside_sampler = make_soup_sampler(g, sinks);
  return ctx;
}

namespace {

// h-transformed walk from v until absorption at `target`, staying off removed
// edges; h must be the hitting vector of the absorbing system
std::vector<HalfEdge> walk_to_target(const MetricGraph& g, VertexId v,
                                     const std::vector<char>& removed,
                                     const std::vector<double>& h, VertexId target, Rng& rng) {
  std::vector<HalfEdge> path;
  VertexId cur = v;
  for (;;) {
    double total = 0.0;
    for (HalfEdge he : g.half_edges(cur)) {
      if (removed[he.edge]) continue;
      const VertexId u = g.tip_of(he);
      const double hu = u == target ? 1.0 : h[u];
      total += hu / g.edge(he.edge).length;
    }
    double pick = rng.uniform() * total;
    HalfEdge chosen{};
    for (HalfEdge he : g.half_edges(cur)) {
      if (removed[he.edge]) continue;
      const VertexId u = g.tip_of(he);
      const double hu = u == target ? 1.0 : h[u];
      pick -= hu / g.edge(he.edge).length;
      chosen = he;
      if (pick <= 0.0) break;
    }
    path.push_back(chosen);
    cur = g.tip_of(chosen);
    if (cur == target) return path;
    if (path.size() > 10000000) throw std::runtime_error("walk_to_target: runaway walk");
  }
}

}  // namespace

NSample sample_n_direct(const NDirectContext& ctx, const std::map<VertexId, double>& boundary_times,
                        Rng& rng) {
  const StarGraph& star = *ctx.star;
  const MetricGraph& g = star.graph;
  NSample out;
  out.k.assign(g.vertex_count(), 0);
  out.local_times.assign(g.vertex_count(), 0.0);

  auto time_of = [&](VertexId v) {
    auto it = boundary_times.find(v);
    if (it == boundary_times.end()) throw std::invalid_argument("sample_n_direct: missing boundary time");
    return it->second;
  };

  // Poisson pair and return counts
  std::vector<std::vector<HalfEdge>> paths;
  for (const auto& [key, mass] : ctx.pair_mass) {
    const double mean = 2.0 * mass * std::sqrt(time_of(key.first) * time_of(key.second));
    const long n = rng.poisson(mean);
    if (n > 0) out.pair_excursions[key] = static_cast<int>(n);
    for (long i = 0; i < n; ++i)
      paths.push_back(walk_to_target(g, key.first, ctx.star_edge_mask,
                                     ctx.hit_vectors.at(key.second), key.second, rng));
  }
  for (const auto& [v, mass] : ctx.return_mass) {
    const long n = rng.poisson(time_of(v) * mass);
    if (n > 0) out.pair_excursions[make_pair_key(v, v)] = static_cast<int>(n);
    for (long i = 0; i < n; ++i)
      paths.push_back(walk_to_target(g, v, ctx.star_edge_mask, ctx.hit_vectors.at(v), v, rng));
  }

  // outside loops
  const DiscreteLoopConfig outside = ctx.outside_sampler.sample(rng);
  out.outside_loops = outside.total_loops();

  // star-edge crossings: uniform among parity-admissible 0/1 configurations
  std::vector<int> parity(g.vertex_count(), 0);
  for (const auto& [key, n] : out.pair_excursions) {
    if (key.first == key.second) continue;  // returns contribute evenly
    parity[key.first] ^= n & 1;
    parity[key.second] ^= n & 1;
  }
  auto star_cfg = admissible_with_parity(g, star.star_edges, parity, rng);
  if (!star_cfg) throw std::logic_error("sample_n_direct: parity system unsolvable");
  out.star_crossings.reserve(star.star_edges.size());
  for (EdgeId e : star.star_edges) out.star_crossings.push_back(star_cfg->alpha[e]);

  // visit counts: half the incident crossing count over loops, excursion
  // paths and star-edge crossings together
  std::vector<int> k(g.vertex_count(), 0);
  {
    std::vector<int> cross(g.edges().size(), 0);
    for (const auto& [loop, c] : outside.loops)
      for (HalfEdge h : loop.steps) cross[h.edge] += c;
    for (const auto& path : paths)
      for (HalfEdge h : path) ++cross[h.edge];
    for (EdgeId e : star.star_edges) cross[e] = star_cfg->alpha[e];
    for (int v = 0; v < g.vertex_count(); ++v) {
      int s = 0;
      for (HalfEdge he : g.half_edges(v)) s += cross[he.edge];
      if (s % 2 != 0) throw std::logic_error("sample_n_direct: odd incident crossing sum");
      k[v] = s / 2;
    }
  }
  out.k = k;

  // local times: fixed at the boundary, gamma elsewhere outside W
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_sink(v) || star.is_star_vertex(v)) continue;
    if (boundary_times.count(v)) {
      out.local_times[v] = boundary_times.at(v);
      continue;
    }
    out.local_times[v] = rng.gamma(k[v] + 0.5, 0.5 * ctx.rates[v]);
  }
  return out;
}

int uncrossed_star_degree(const StarGraph& star, const NSample& sample, VertexId v) {
  int d = 0;
  for (size_t i = 0; i < star.star_edges.size(); ++i) {
    const Edge& e = star.graph.edge(star.star_edges[i]);
    if (sample.star_crossings[i] != 0) continue;
    if (e.a == v) ++d;
    if (e.b == v) ++d;
  }
  return d;
}

}  // namespace loopsoup
