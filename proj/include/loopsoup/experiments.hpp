#pragma once

#include <string>
#include <vector>

#include "loopsoup/graph.hpp"
#include "loopsoup/report.hpp"

namespace loopsoup {

struct ExperimentConfig {
  std::string graph;          // file path or builtin name; experiments pick a default
  long reps = 100000;
  uint64_t seed = 1;
  double eps = 0.05;          // conditioning window half-width
  int grid = 33;              // grid points per edge
  std::vector<double> caps = {0.4, 0.2, 0.1};
  std::string out_dir;
  bool serial = false;        // serial reference path instead of the OpenMP kernels
};

// named desk-scale graphs used across the verification suite
MetricGraph builtin_graph(const std::string& name);
MetricGraph resolve_graph(const ExperimentConfig& cfg, const std::string& fallback);

// verification experiments (CLI `verify <name>`)
StatReport verify_soup(const ExperimentConfig& cfg);                // visit law + oracle TV
StatReport verify_zero_hit(const ExperimentConfig& cfg);            // q-law and bridge checks
StatReport verify_lejan(const ExperimentConfig& cfg);
StatReport verify_cluster_uniformity(const ExperimentConfig& cfg);
StatReport verify_markov(const ExperimentConfig& cfg);
StatReport verify_star(const ExperimentConfig& cfg);
StatReport verify_n_measure(const ExperimentConfig& cfg);
StatReport verify_kingman(const ExperimentConfig& cfg);
StatReport verify_roundtrip(const ExperimentConfig& cfg);
StatReport verify_sde(const ExperimentConfig& cfg);

// emitters (CLI `sample <what>`)
void run_sample_loops(const ExperimentConfig& cfg, const std::string& path);
void run_sample_field(const ExperimentConfig& cfg, const std::string& path);
void run_sample_gff(const ExperimentConfig& cfg, const std::string& path);

}  // namespace loopsoup
