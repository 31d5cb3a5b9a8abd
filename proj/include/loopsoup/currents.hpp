#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "loopsoup/graph.hpp"
#include "loopsoup/loop_soup.hpp"
#include "loopsoup/occupation.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

// alpha_e in {0,1} per edge; zero off the supporting edge set. At every vertex
// the incident sum is even (a self-loop counts twice, so it never constrains).
struct ParityConfig {
  std::vector<char> alpha;
  bool operator==(const ParityConfig&) const = default;
  std::string bitstring() const;
};

struct CycleBasis {
  std::vector<EdgeId> tree_edges;
  std::vector<EdgeId> chords;  // self-loops included
  int dimension() const { return static_cast<int>(chords.size()); }
};

// deterministic lowest-id spanning forest of the given edge subset
CycleBasis cycle_basis(const MetricGraph& g, const std::vector<EdgeId>& edges);

// uniform admissible configuration supported on the cluster edges: fair bits
// on chords, tree edges completed by the unique parity solution
ParityConfig admissible_uniform(const MetricGraph& g, const ClusterSet& clusters, Rng& rng);

// uniform solution over `edges` with prescribed vertex parities (mod 2 of the
// incident sum); nullopt when the parity system is unsolvable
std::optional<ParityConfig> admissible_with_parity(const MetricGraph& g,
                                                   const std::vector<EdgeId>& edges,
                                                   const std::vector<int>& vertex_parity,
                                                   Rng& rng);

// number of admissible configurations = 2^{sum of per-cluster cycle dimensions}
uint64_t count_admissible(const MetricGraph& g, const ClusterSet& clusters);
uint64_t count_admissible_edges(const MetricGraph& g, const std::vector<EdgeId>& edges);

// alpha_e = n(e) mod 2
ParityConfig parity_of_config(const DiscreteLoopConfig& config, const MetricGraph& g);

// exact parity marginal of the random-current model on the given edges:
// P(alpha) prop. to prod cosh(beta_e)^{1-alpha_e} sinh(beta_e)^{alpha_e}
struct ParityDistribution {
  std::vector<ParityConfig> support;
  std::vector<double> prob;
};
ParityDistribution current_parity_weights(const MetricGraph& g, const std::vector<EdgeId>& edges,
                                          const std::vector<double>& beta);

}  // namespace loopsoup
