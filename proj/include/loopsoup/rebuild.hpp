#pragma once

#include <vector>

#include "loopsoup/currents.hpp"
#include "loopsoup/graph.hpp"
#include "loopsoup/loop_soup.hpp"
#include "loopsoup/occupation.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

// Per-vertex gluing data: a uniform perfect matching of the incident crossing
// ends, the beta(1/2, k_v) share of local time owned by point loops, its
// Poisson-Dirichlet(0, 1/2) subdivision, and the k_v - 1 uniform split points
// of the remainder, one interval per glued pair.
struct VertexGluing {
  VertexId vertex = -1;
  int k = 0;
  std::vector<std::pair<int, int>> pairing;  // indices into the local end list
  double beta_share = 1.0;
  std::vector<double> point_loop_masses;     // PD parts of [0, beta], truncated
  std::vector<double> split_points;          // k-1 sorted uniforms on [beta, 1]
};

struct GluingPlan {
  std::vector<VertexGluing> per_vertex;
};

struct ReconstructedLoops {
  DiscreteLoopConfig loops;                        // loops that cross edges
  std::vector<std::vector<double>> point_loops;    // per vertex: group masses
  GluingPlan plan;
};

// rebuild loops from per-edge crossing counts (consistent parities required)
ReconstructedLoops glue(const MetricGraph& g, const std::vector<int>& crossings, Rng& rng);

// full reconstruction given an occupation field: uniform admissible parities
// on the clusters, killed-coalescent crossing counts per edge (via the time
// change T), then glue
struct FieldReconstruction {
  ParityConfig parity;
  std::vector<int> crossings;
  ReconstructedLoops loops;
};
FieldReconstruction reconstruct_from_field(const MetricGraph& g, const OccupationField& field,
                                           long coalescent_n0, Rng& rng);

// time change of one edge field: int ds / value (inf when the field dies)
double edge_time_change(const EdgeField& f);

}  // namespace loopsoup
