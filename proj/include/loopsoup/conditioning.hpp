#pragma once

#include <map>
#include <optional>
#include <vector>

#include "loopsoup/graph.hpp"
#include "loopsoup/harmonic.hpp"
#include "loopsoup/loop_soup.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

// windowed conditioning data: per-star-vertex caps; the no-zero event on the
// star edges is always part of the conditioning
struct ConditionWindow {
  std::map<VertexId, double> caps;
};

// key used to compare outside traces: unordered pair of boundary vertices
using BoundaryPair = std::pair<VertexId, VertexId>;
inline BoundaryPair make_pair_key(VertexId a, VertexId b) {
  return a <= b ? BoundaryPair{a, b} : BoundaryPair{b, a};
}

struct NSample {
  std::vector<int> star_crossings;              // aligned with star.star_edges
  std::vector<int> k;                           // k_v per vertex
  std::vector<double> local_times;              // valid for v outside W
  std::map<BoundaryPair, int> pair_excursions;  // v == v' entries are returns
  int outside_loops = 0;
  long attempts = 1;
};

// excursion decomposition of a discrete config relative to the star structure:
// segments between consecutive boundary (replica) visits that avoid the star
// edges; loops avoiding W and the boundary are counted separately
void decompose_outside_trace(const StarGraph& star, const DiscreteLoopConfig& config,
                             std::map<BoundaryPair, int>& pairs, int& outside_loops);

// Definition-4.2 sampler: full soups until the caps and the no-zero event on
// E(W) hold. Null when the attempt budget runs out.
struct RejectionStats {
  long attempts = 0;
  long accepted = 0;
  double acceptance() const { return attempts ? static_cast<double>(accepted) / attempts : 0.0; }
};
std::optional<NSample> sample_n_rejection(const StarGraph& star, const ConditionWindow& window,
                                          const SoupSampler& sampler, Rng& rng,
                                          long max_attempts, RejectionStats* stats = nullptr);

// ---- direct sampler at exact boundary times ---------------------------------
//
// Valid when (W, E(W)) is connected: Poisson pair counts with mean
// 2 H(v,v') sqrt(x_v x_v'), per-vertex returning excursions, an outside loop
// soup with sink at the boundary, and star-edge crossings drawn uniformly
// among the parity-admissible configurations.
struct NDirectContext {
  const StarGraph* star = nullptr;
  std::vector<VertexId> boundary;                       // replicas
  std::vector<char> star_edge_mask;                     // removed edges
  std::map<BoundaryPair, double> pair_mass;             // H(v,v'), v != v'
  std::map<VertexId, double> return_mass;               // H(v,v)
  std::map<VertexId, std::vector<double>> hit_vectors;  // absorbing target -> h
  SoupSampler outside_sampler;
  std::vector<double> rates;
};
NDirectContext make_n_direct_context(const StarGraph& star);

NSample sample_n_direct(const NDirectContext& ctx, const std::map<VertexId, double>& boundary_times,
                        Rng& rng);

// number of crossings of a replica's star edge is 0/1; d_v^{W,0} for gamma laws
int uncrossed_star_degree(const StarGraph& star, const NSample& sample, VertexId v);

}  // namespace loopsoup
