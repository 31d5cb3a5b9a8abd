#pragma once

#include <map>
#include <string>
#include <vector>

#include "loopsoup/graph.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

// An unrooted unoriented discrete loop, stored in canonical form: the
// lexicographically smallest (edge, dir) sequence over all rotations of both
// orientations.
struct DiscreteLoop {
  std::vector<HalfEdge> steps;

  int length() const { return static_cast<int>(steps.size()); }
  bool operator==(const DiscreteLoop&) const = default;
  bool operator<(const DiscreteLoop& o) const { return steps < o.steps; }

  // maximal power J: the loop as the J-fold concatenation of a primitive loop
  int multiplicity_J() const;
  // true when reversal gives back the same unrooted oriented loop
  bool reversal_symmetric(const MetricGraph& g) const;
  std::vector<VertexId> vertex_sequence(const MetricGraph& g) const;
};

DiscreteLoop canonical_loop(const MetricGraph& g, std::vector<HalfEdge> steps);

// nu(loop): intensity of the unrooted unoriented loop under the loop measure
double loop_weight(const DiscreteLoop& loop, const MetricGraph& g);
double loop_weight(const DiscreteLoop& loop, const MetricGraph& g, const std::vector<double>& rates);

struct DiscreteLoopConfig {
  std::map<DiscreteLoop, int> loops;  // canonical loop -> copies

  int total_loops() const;
  // crossings per edge (any direction); sink-adjacent edges always 0
  std::vector<int> crossings(const MetricGraph& g) const;
  // k_v = half the incident crossing count (departures from v)
  std::vector<int> visit_counts(const MetricGraph& g) const;
  bool operator==(const DiscreteLoopConfig&) const = default;
};

// P(k_v = k) = p^k / k! * Gamma(k + 1/2) / Gamma(1/2) * sqrt(1 - p)
std::vector<double> visits_distribution(double p, int kmax);
long sample_visit_count(double p, Rng& rng);

// Exact sampler: vertex by vertex, visits from the pmf above with already
// processed vertices killed, excursions by h-transformed walk, ends paired
// uniformly. `extra_sinks` enlarges the kill set (loops avoiding those
// vertices only).
//
// The harmonic solves depend only on (graph, kill set, order), so they are
// done once here and reused across draws.
struct SoupSampler {
  const MetricGraph* graph = nullptr;
  std::vector<double> rates;
  std::vector<VertexId> order;               // vertices actually processed
  std::vector<std::vector<double>> h;        // P(hit v before kill set), per step
  std::vector<double> p;                     // return probabilities, per step

  DiscreteLoopConfig sample(Rng& rng) const;
};
SoupSampler make_soup_sampler(const MetricGraph& g, const std::vector<VertexId>& extra_sinks = {},
                              std::vector<VertexId> order = {});

DiscreteLoopConfig sample_discrete_soup(const MetricGraph& g, Rng& rng,
                                        const std::vector<VertexId>& extra_sinks = {});

// vertex order override, for the order-invariance check
DiscreteLoopConfig sample_discrete_soup_ordered(const MetricGraph& g, Rng& rng,
                                                const std::vector<VertexId>& order,
                                                const std::vector<VertexId>& extra_sinks = {});

// local times given a config: independent gamma(k_v + 1/2, a_v / 2); zero at
// the sink and at extra sinks
std::vector<double> sample_vertex_local_times(const DiscreteLoopConfig& config,
                                              const MetricGraph& g, Rng& rng,
                                              const std::vector<VertexId>& extra_sinks = {});

// ---- brute-force oracle ----------------------------------------------------

struct LoopEnumeration {
  std::vector<std::pair<DiscreteLoop, double>> loops;  // with exact nu weights
  double truncated_tail_mass = 0.0;                    // sum of nu over loops longer than cap
};

// all unrooted unoriented loops with at most `length_cap` edges, with exact
// weights; the tail mass comes from sum_{n > cap} trace(M^n) / 2n
LoopEnumeration enumerate_loops_oracle(const MetricGraph& g, int length_cap,
                                       const std::vector<VertexId>& extra_sinks = {});

// independent Poisson(nu) copies per enumerated loop
DiscreteLoopConfig sample_soup_oracle(const LoopEnumeration& loops, Rng& rng);

// one loop per line: cyclic vertex sequence plus multiplicity
std::string dump_config(const DiscreteLoopConfig& config, const MetricGraph& g);

}  // namespace loopsoup
