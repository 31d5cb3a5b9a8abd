#pragma once

#include <vector>

#include "loopsoup/graph.hpp"
#include "loopsoup/loop_soup.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct EdgeField {
  EdgeId edge = -1;
  std::vector<double> grid;         // positions, 0 .. rho(e)
  std::vector<double> values;       // field at grid points; ends match vertex times
  std::vector<char> interval_zero;  // exact per-interval zero indicators
  bool zero_hit = false;
  int crossings = 0;
};

struct OccupationField {
  std::vector<double> vertex_times;
  std::vector<EdgeField> edge_fields;  // indexed by edge id
};

// conditional zero-hit law on an edge: any crossing keeps the field positive,
// otherwise P(no zero) = 1 - exp(-sqrt(ab)/rho)
bool edge_zero_hit(double a, double b, double rho, int n_crossings, Rng& rng);
double no_zero_probability(double a, double b, double rho);

// field on one edge given endpoint local times and crossing count. The n = 0
// field draws the zero-hit flag from the closed form and then samples the
// conditional bridge: BESQ^3 when positive, the reflected squared bridge when
// it must hit zero. condition_positive forces the positive branch.
EdgeField sample_edge_field(double a, double b, double rho, int n_crossings,
                            bool condition_positive, const std::vector<double>& grid, Rng& rng);

// full occupation field for a sampled config + vertex times; grid_points per
// edge. Vertices in extra_sinks carry zero local time.
OccupationField sample_occupation(const MetricGraph& g, const DiscreteLoopConfig& config,
                                  const std::vector<double>& vertex_times, int grid_points,
                                  Rng& rng);

// ---- clusters ---------------------------------------------------------------

struct ClusterSet {
  int count = 0;
  std::vector<int> edge_cluster;    // edge id -> cluster or -1
  std::vector<int> vertex_cluster;  // vertex -> cluster or -1
  std::vector<std::vector<EdgeId>> cluster_edges;
  std::vector<std::vector<VertexId>> cluster_vertices;
};

// maximal sets of adjacent edges with positive field; vertices with positive
// local time but no surviving edge form singleton clusters
ClusterSet extract_clusters(const MetricGraph& g, const OccupationField& field);

// ---- independent construction of the crossing-free edge trace --------------
//
// The n = 0 trace built from first principles: endpoint excursion fields are
// BESQ^0 bridges to zero (one of them reversed) and interior loops contribute
// a squared Brownian bridge; the zero set is resolved exactly by bisection.
// Used to verify the closed-form zero-hit law against an independent route.
struct TraceOracleSample {
  bool no_zero = false;
  std::vector<double> values;  // component sum at grid points
};
TraceOracleSample edge_trace_zero_oracle(double a, double b, double rho,
                                         const std::vector<double>& grid, Rng& rng);

void dump_field_csv(const MetricGraph& g, const OccupationField& field, const std::string& path);

}  // namespace loopsoup
