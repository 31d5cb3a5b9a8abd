#pragma once

#include <map>
#include <vector>

#include "loopsoup/graph.hpp"

namespace loopsoup {

// Potential-theory kernels of the killed walk / Brownian motion. All solves
// are dense and direct; graphs here stay desk-scale.

// a_v = sum of 1/rho(e) over directed edges rooted at v, sink-adjacent
// edges included (the walk is killed at the sink, not slowed down)
std::vector<double> vertex_rates(const MetricGraph& g);

// rates when a set of edges is removed from the graph
std::vector<double> vertex_rates_masked(const MetricGraph& g, const std::vector<char>& edge_removed);

// Harmonic solve: h(u) = P_u(first hit of the absorbing set lands on a vertex
// with boundary value 1), or any other boundary data. `edge_removed` (may be
// empty) deletes edges outright. Vertices that cannot reach the boundary get 0.
std::vector<double> hitting_values(const MetricGraph& g, const std::vector<char>& edge_removed,
                                   const std::map<VertexId, double>& boundary);

// probability that the embedded walk started at v returns to v before hitting
// `killed_at` (which must contain the sink)
double return_probability(const MetricGraph& g, VertexId v, const std::vector<VertexId>& killed_at);
double return_probability_masked(const MetricGraph& g, VertexId v,
                                 const std::vector<char>& killed, const std::vector<char>& edge_removed);

// Excursion kernel at v: mass under the Brownian excursion measure at v of
// excursions (in the graph minus removed edges) whose first hit of
// stops ∪ {v} lands at w. The w = v entry is the mass of discrete-visible
// returning excursions. Mass through one adjacent edge is 1/(2 rho(e)).
struct ExcursionKernel {
  std::map<VertexId, double> mass;  // target vertex -> H(v, target); includes v
  double total_away() const {       // H(v): everything that escapes to stops \ {v}
    double s = 0.0;
    for (auto& [w, m] : mass)
      if (w != source) s += m;
    return s;
  }
  VertexId source = -1;
};
ExcursionKernel excursion_kernel(const MetricGraph& g, VertexId v,
                                 const std::vector<char>& edge_removed,
                                 const std::vector<VertexId>& stops);

// G = 2 * inverse of the conductance Laplacian (conductances 1/rho, Dirichlet
// row at the sink). Calibrated so that on a single edge of length rho the
// sink-killed local time gamma(1/2, 1/(2 rho)) matches (1/2) N(0, G)^2.
// Returned as a dense vertex_count x vertex_count row-major matrix with zero
// row/column at the sink.
std::vector<double> green_function(const MetricGraph& g);

inline double green_at(const std::vector<double>& green, int n, VertexId u, VertexId w) {
  return green[static_cast<size_t>(u) * n + w];
}

// bundled table used by samplers that keep asking the same questions
struct PotentialTable {
  std::vector<double> rates;
  std::vector<double> green;       // row-major
  std::vector<double> return_prob; // p(v,v) with kill = {sink}
  int n = 0;
  double green_at(VertexId u, VertexId w) const { return green[static_cast<size_t>(u) * n + w]; }
};
PotentialTable make_potential_table(const MetricGraph& g);

void dump_matrix_csv(const std::vector<double>& m, int n, const std::string& path);

}  // namespace loopsoup
