#include "loopsoup/loop_soup.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "loopsoup/harmonic.hpp"

namespace loopsoup {

// ---- canonical form --------------------------------------------------------

static std::vector<HalfEdge> reversed_steps(const MetricGraph& g, const std::vector<HalfEdge>& s) {
  std::vector<HalfEdge> r(s.rbegin(), s.rend());
  for (HalfEdge& h : r) h = g.reversed(h);
  return r;
}

static std::vector<HalfEdge> min_rotation(const std::vector<HalfEdge>& s) {
  const size_t n = s.size();
  std::vector<HalfEdge> best = s;
  std::vector<HalfEdge> cur = s;
  for (size_t r = 1; r < n; ++r) {
    std::rotate(cur.begin(), cur.begin() + 1, cur.end());
    if (cur < best) best = cur;
  }
  return best;
}

DiscreteLoop canonical_loop(const MetricGraph& g, std::vector<HalfEdge> steps) {
  if (steps.empty()) throw std::invalid_argument("canonical_loop: empty loop");
  for (size_t i = 0; i < steps.size(); ++i) {
    const HalfEdge next = steps[(i + 1) % steps.size()];
    if (g.tip_of(steps[i]) != g.root_of(next))
      throw std::invalid_argument("canonical_loop: steps not cyclically adjacent");
  }
  std::vector<HalfEdge> a = min_rotation(steps);
  std::vector<HalfEdge> b = min_rotation(reversed_steps(g, steps));
  DiscreteLoop out;
  out.steps = std::min(a, b);
  return out;
}

int DiscreteLoop::multiplicity_J() const {
  const int n = length();
  for (int p = 1; p <= n; ++p) {
    if (n % p != 0) continue;
    bool periodic = true;
    for (int i = 0; i < n && periodic; ++i) periodic = steps[i] == steps[i % p];
    if (periodic) return n / p;
  }
  return 1;
}

bool DiscreteLoop::reversal_symmetric(const MetricGraph& g) const {
  return min_rotation(steps) == min_rotation(reversed_steps(g, steps));
}

std::vector<VertexId> DiscreteLoop::vertex_sequence(const MetricGraph& g) const {
  std::vector<VertexId> out;
  out.reserve(steps.size());
  for (HalfEdge h : steps) out.push_back(g.root_of(h));
  return out;
}

double loop_weight(const DiscreteLoop& loop, const MetricGraph& g) {
  return loop_weight(loop, g, vertex_rates(g));
}

double loop_weight(const DiscreteLoop& loop, const MetricGraph& g, const std::vector<double>& rates) {
  double mu = 1.0;
  for (HalfEdge h : loop.steps)
    mu *= (1.0 / g.edge(h.edge).length) / rates[g.root_of(h)];
  mu /= loop.multiplicity_J();
  // projection of mu/2 onto unoriented loops: reversal-symmetric loops keep
  // half the weight, the others collect both orientations
  return loop.reversal_symmetric(g) ? 0.5 * mu : mu;
}

// ---- config ----------------------------------------------------------------

int DiscreteLoopConfig::total_loops() const {
  int n = 0;
  for (auto& [l, c] : loops) n += c;
  return n;
}

std::vector<int> DiscreteLoopConfig::crossings(const MetricGraph& g) const {
  std::vector<int> n(g.edges().size(), 0);
  for (auto& [l, c] : loops)
    for (HalfEdge h : l.steps) n[h.edge] += c;
  return n;
}

std::vector<int> DiscreteLoopConfig::visit_counts(const MetricGraph& g) const {
  const std::vector<int> n = crossings(g);
  std::vector<int> k(g.vertex_count(), 0);
  for (int v = 0; v < g.vertex_count(); ++v) {
    int s = 0;
    for (HalfEdge h : g.half_edges(v)) s += n[h.edge];  // self-loops counted twice
    if (s % 2 != 0) throw std::logic_error("visit_counts: odd incident crossing sum");
    k[v] = s / 2;
  }
  return k;
}

// ---- visit-count law -------------------------------------------------------

std::vector<double> visits_distribution(double p, int kmax) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("visits_distribution: p outside [0,1)");
  std::vector<double> pmf(kmax + 1);
  pmf[0] = std::sqrt(1.0 - p);
  for (int k = 0; k < kmax; ++k) pmf[k + 1] = pmf[k] * p * (k + 0.5) / (k + 1.0);
  return pmf;
}

long sample_visit_count(double p, Rng& rng) {
  if (p <= 0.0) return 0;
  double u = rng.uniform();
  double term = std::sqrt(1.0 - p);
  long k = 0;
  double cum = term;
  while (u > cum) {
    term *= p * (k + 0.5) / (k + 1.0);
    cum += term;
    ++k;
    if (term < 1e-14 && k > 1) break;  // tail guard
    if (k > 100000) throw std::runtime_error("sample_visit_count: runaway tail");
  }
  return k;
}

// ---- exact sampler ---------------------------------------------------------

namespace {

// walk from v back to v, h-transformed to return before the kill set
std::vector<HalfEdge> sample_excursion(const MetricGraph& g, VertexId v,
                                       const std::vector<double>& h, Rng& rng) {
  std::vector<HalfEdge> path;
  VertexId cur = v;
  for (;;) {
    // step weights (1/rho) h(tip); at the start this is the conditioned first step
    double total = 0.0;
    for (HalfEdge he : g.half_edges(cur)) total += h[g.tip_of(he)] / g.edge(he.edge).length;
    double u = rng.uniform() * total;
    HalfEdge chosen{};
    for (HalfEdge he : g.half_edges(cur)) {
      u -= h[g.tip_of(he)] / g.edge(he.edge).length;
      chosen = he;
      if (u <= 0.0) break;
    }
    path.push_back(chosen);
    cur = g.tip_of(chosen);
    if (cur == v) return path;
    if (path.size() > 10000000) throw std::runtime_error("sample_excursion: runaway walk");
  }
}

}  // namespace

SoupSampler make_soup_sampler(const MetricGraph& g, const std::vector<VertexId>& extra_sinks,
                              std::vector<VertexId> order) {
  if (order.empty())
    for (int v = 0; v < g.vertex_count(); ++v) order.push_back(v);
  SoupSampler s;
  s.graph = &g;
  s.rates = vertex_rates(g);
  std::vector<char> killed(g.vertex_count(), 0);
  killed[g.sink()] = 1;
  for (VertexId v : extra_sinks) killed[v] = 1;
  for (VertexId v : order) {
    if (killed[v]) continue;
    std::map<VertexId, double> boundary;
    boundary[v] = 1.0;
    for (int u = 0; u < g.vertex_count(); ++u)
      if (killed[u]) boundary[u] = 0.0;
    std::vector<double> h = hitting_values(g, {}, boundary);
    double p = 0.0;
    for (HalfEdge he : g.half_edges(v))
      p += (1.0 / g.edge(he.edge).length) * h[g.tip_of(he)];
    p /= s.rates[v];
    s.order.push_back(v);
    s.h.push_back(std::move(h));
    s.p.push_back(p);
    killed[v] = 1;
  }
  return s;
}

DiscreteLoopConfig sample_discrete_soup(const MetricGraph& g, Rng& rng,
                                        const std::vector<VertexId>& extra_sinks) {
  return make_soup_sampler(g, extra_sinks).sample(rng);
}

DiscreteLoopConfig sample_discrete_soup_ordered(const MetricGraph& g, Rng& rng,
                                                const std::vector<VertexId>& order,
                                                const std::vector<VertexId>& extra_sinks) {
  return make_soup_sampler(g, extra_sinks, order).sample(rng);
}

DiscreteLoopConfig SoupSampler::sample(Rng& rng) const {
  const MetricGraph& g = *graph;
  DiscreteLoopConfig config;
  for (size_t step = 0; step < order.size(); ++step) {
    const VertexId v = order[step];
    const std::vector<double>& h = this->h[step];
    const long k = sample_visit_count(p[step], rng);
    if (k > 0) {
      std::vector<std::vector<HalfEdge>> excursions(k);
      for (long i = 0; i < k; ++i) excursions[i] = sample_excursion(g, v, h, rng);

      // uniform pairing of the 2k excursion ends
      const int two_k = static_cast<int>(2 * k);
      std::vector<int> partner(two_k, -1);
      std::vector<int> open;
      for (int i = 0; i < two_k; ++i) open.push_back(i);
      while (!open.empty()) {
        const int a = open.back();
        open.pop_back();
        const int pick = static_cast<int>(rng.uniform_index(open.size()));
        const int b = open[pick];
        open.erase(open.begin() + pick);
        partner[a] = b;
        partner[b] = a;
      }

      // ends 2i / 2i+1 are the two sides of excursion i; the sibling pairs and
      // the sampled partner pairs are two perfect matchings whose union is a
      // disjoint set of alternating cycles, one per loop
      std::vector<char> visited(two_k, 0);
      for (int e0 = 0; e0 < two_k; ++e0) {
        if (visited[e0]) continue;
        std::vector<HalfEdge> steps;
        int a = e0;
        for (;;) {
          const int exc = a / 2;
          const int b = a ^ 1;  // sibling end
          visited[a] = visited[b] = 1;
          if (a % 2 == 0) {
            steps.insert(steps.end(), excursions[exc].begin(), excursions[exc].end());
          } else {
            for (auto it = excursions[exc].rbegin(); it != excursions[exc].rend(); ++it)
              steps.push_back(g.reversed(*it));
          }
          const int c = partner[b];
          if (c == e0) break;
          a = c;
        }
        config.loops[canonical_loop(g, std::move(steps))] += 1;
      }
    }
  }
  return config;
}

std::vector<double> sample_vertex_local_times(const DiscreteLoopConfig& config,
                                              const MetricGraph& g, Rng& rng,
                                              const std::vector<VertexId>& extra_sinks) {
  const std::vector<double> rates = vertex_rates(g);
  const std::vector<int> k = config.visit_counts(g);
  std::vector<double> times(g.vertex_count(), 0.0);
  std::vector<char> dead(g.vertex_count(), 0);
  dead[g.sink()] = 1;
  for (VertexId v : extra_sinks) dead[v] = 1;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (dead[v]) continue;
    times[v] = rng.gamma(k[v] + 0.5, 0.5 * rates[v]);
  }
  return times;
}

// ---- enumeration oracle ----------------------------------------------------

LoopEnumeration enumerate_loops_oracle(const MetricGraph& g, int length_cap,
                                       const std::vector<VertexId>& extra_sinks) {
  if (length_cap < 1 || length_cap > 26)
    throw std::invalid_argument("enumerate_loops_oracle: cap out of guarded range");
  std::vector<char> killed(g.vertex_count(), 0);
  killed[g.sink()] = 1;
  for (VertexId v : extra_sinks) killed[v] = 1;
  const std::vector<double> rates = vertex_rates(g);

  LoopEnumeration out;
  std::set<DiscreteLoop> seen;
  // DFS over rooted directed walks; canonicalization dedupes rotations and
  // orientation
  std::vector<HalfEdge> stack;
  auto dfs = [&](auto&& self, VertexId start, VertexId cur, int depth) -> void {
    for (HalfEdge he : g.half_edges(cur)) {
      const VertexId nxt = g.tip_of(he);
      if (killed[nxt]) continue;
      if (nxt < start) continue;  // root each loop at its smallest vertex
      stack.push_back(he);
      if (nxt == start) {
        DiscreteLoop loop = canonical_loop(g, stack);
        if (seen.insert(loop).second) {
          const double nu = loop_weight(loop, g, rates);
          out.loops.emplace_back(std::move(loop), nu);
        }
      }
      if (depth + 1 < length_cap) self(self, start, nxt, depth + 1);
      stack.pop_back();
    }
  };
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (killed[v]) continue;
    dfs(dfs, v, v, 0);
  }
  std::sort(out.loops.begin(), out.loops.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // exact tail: sum_{n > cap} trace(M^n) / (2n) for the killed transition matrix
  std::vector<int> idx(g.vertex_count(), -1);
  int m = 0;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (!killed[v]) idx[v] = m++;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (killed[v]) continue;
    for (HalfEdge he : g.half_edges(v)) {
      const VertexId u = g.tip_of(he);
      if (killed[u]) continue;
      M(idx[v], idx[u]) += (1.0 / g.edge(he.edge).length) / rates[v];
    }
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(m, m);
  for (int n = 1; n <= length_cap; ++n) P = P * M;
  double tail = 0.0;
  for (int n = length_cap + 1; n <= 4000; ++n) {
    P = P * M;
    const double tr = P.trace();
    tail += tr / (2.0 * n);
    if (tr / (2.0 * n) < 1e-17 && n > length_cap + 8) break;
  }
  out.truncated_tail_mass = tail;
  return out;
}

DiscreteLoopConfig sample_soup_oracle(const LoopEnumeration& loops, Rng& rng) {
  DiscreteLoopConfig config;
  for (const auto& [loop, nu] : loops.loops) {
    const long c = rng.poisson(nu);
    if (c > 0) config.loops[loop] += static_cast<int>(c);
  }
  return config;
}

std::string dump_config(const DiscreteLoopConfig& config, const MetricGraph& g) {
  std::ostringstream out;
  for (const auto& [loop, count] : config.loops) {
    bool first = true;
    for (VertexId v : loop.vertex_sequence(g)) {
      if (!first) out << ' ';
      out << g.name(v);
      first = false;
    }
    out << " x" << count << "\n";
  }
  return out.str();
}

}  // namespace loopsoup
