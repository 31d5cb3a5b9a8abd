#pragma once

#include <vector>

#include "loopsoup/graph.hpp"
#include "loopsoup/harmonic.hpp"
#include "loopsoup/occupation.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

// Gaussian free field with boundary value 0 at the sink: centered Gaussian
// vector with covariance green_function(g).
struct GffSampler {
  int n = 0;
  VertexId sink = -1;
  std::vector<double> chol;  // row-major lower factor over non-sink vertices
  std::vector<VertexId> interior;
};
GffSampler make_gff_sampler(const MetricGraph& g);
std::vector<double> sample_gff(const GffSampler& s, Rng& rng);

// fair independent sign per cluster; vertices off all clusters get 0
std::vector<int> lupu_signs(const MetricGraph& g, const ClusterSet& clusters, Rng& rng);

// ---- cluster exploration and its SDE ----------------------------------------

struct ExplorationStep {
  double t = 0.0;       // exploration time at the start of the step
  double dt = 0.0;
  double x = 0.0;       // sqrt local time at the frontier
  double dx = 0.0;      // increment over the step
  double drift = 0.0;   // 2 sum_b H_t(frontier, b) (X_b - X_t), zero boundary included
  int segment = 0;      // index k of the surrounding (T_k, T_{k+1})
  bool interior = false;  // usable for the SDE regression (not cut, not segment end)
};

struct ExplorationResult {
  std::vector<ExplorationStep> steps;
  double zeta = 0.0;
  int segments = 0;
  bool start_dead = false;  // start vertex had zero local time
};

// deterministic exploration of the cluster of `start` through a replayed
// occupation field, at the field's grid resolution; H kernels are recomputed
// at every grid step on the refined unexplored graph
ExplorationResult explore_cluster(const MetricGraph& g, const OccupationField& field,
                                  VertexId start);

// Euler simulation of the local-time SDE (same exploration rules, but the
// field is generated on the fly): d L = 2 sqrt(L) dW - 4 L H dt + (2 N + 1) dt
// with N refreshed each step from its Poisson conditional
ExplorationResult explore_euler(const MetricGraph& g, VertexId start, double x0, int grid_points,
                                Rng& rng);

void dump_trajectory_csv(const ExplorationResult& r, const std::string& path);

}  // namespace loopsoup
