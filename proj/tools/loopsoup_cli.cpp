#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "loopsoup/experiments.hpp"
#include "loopsoup/parallel.hpp"
#include "loopsoup/report.hpp"

using namespace loopsoup;

int main(int argc, char** argv) {
  CLI::App app{"loopsoup: Monte Carlo samplers and verification harness for "
               "Brownian loop soups at intensity 1/2 on metric graphs"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string out_dir = ".";
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--graph", cfg.graph, "graph JSON file or builtin name");
    cmd->add_option("--reps", cfg.reps, "replications");
    cmd->add_option("--seed", cfg.seed, "seed; all randomness derives from it");
    cmd->add_option("--eps", cfg.eps, "conditioning window half-width");
    cmd->add_option("--grid", cfg.grid, "grid points per edge");
    cmd->add_option("--caps", cfg.caps, "cap schedule for the windowed measure");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("--serial", cfg.serial, "use the serial reference kernels");
  };

  // sample loops|field|gff
  auto* sample = app.add_subcommand("sample", "draw and emit samples");
  std::string emit_path;
  std::string sample_what;
  sample->add_option("what", sample_what, "loops | field | gff")->required();
  sample->add_option("--emit", emit_path, "output file");
  add_common(sample);

  // verify <experiment>
  auto* verify = app.add_subcommand("verify", "run a statistical verification experiment");
  std::string experiment;
  verify->add_option("experiment", experiment,
                     "soup | zero-hit | lejan | cluster-uniformity | markov | star | "
                     "n-measure | kingman | roundtrip | sde | all")
      ->required();
  add_common(verify);

  // report merge
  auto* report_cmd = app.add_subcommand("report", "report utilities");
  auto* merge_cmd = report_cmd->add_subcommand("merge", "merge report files");
  std::vector<std::string> merge_inputs;
  std::string merge_output = "report.json";
  merge_cmd->add_option("inputs", merge_inputs, "report.json files")->required();
  merge_cmd->add_option("-o,--out", merge_output, "merged output");

  CLI11_PARSE(app, argc, argv);
  cfg.out_dir = out_dir;
  std::filesystem::create_directories(out_dir);

  if (*sample) {
    const std::string path = emit_path.empty() ? out_dir + "/" + sample_what + ".out" : emit_path;
    if (sample_what == "loops") run_sample_loops(cfg, path);
    else if (sample_what == "field") run_sample_field(cfg, path);
    else if (sample_what == "gff") run_sample_gff(cfg, path);
    else {
      std::cerr << "unknown sample target: " << sample_what << "\n";
      return 2;
    }
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (*verify) {
    const std::map<std::string, StatReport (*)(const ExperimentConfig&)> experiments = {
        {"soup", verify_soup},
        {"zero-hit", verify_zero_hit},
        {"lejan", verify_lejan},
        {"cluster-uniformity", verify_cluster_uniformity},
        {"markov", verify_markov},
        {"star", verify_star},
        {"n-measure", verify_n_measure},
        {"kingman", verify_kingman},
        {"roundtrip", verify_roundtrip},
        {"sde", verify_sde},
    };
    std::vector<std::string> selected;
    if (experiment == "all") {
      for (auto& [name, fn] : experiments) selected.push_back(name);
    } else if (experiments.count(experiment)) {
      selected.push_back(experiment);
    } else {
      std::cerr << "unknown experiment: " << experiment << "\n";
      return 2;
    }
    bool all_pass = true;
    std::vector<StatReport> reports;
    for (const std::string& name : selected) {
      const auto start = std::chrono::steady_clock::now();
      StatReport rep = experiments.at(name)(cfg);
      rep.seed = cfg.seed;
      rep.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      std::cout << rep.summary_lines();
      const std::string path = out_dir + "/report_" + rep.experiment + ".json";
      rep.write(path);
      all_pass = all_pass && rep.pass;
      reports.push_back(std::move(rep));
    }
    if (reports.size() > 1) {
      StatReport merged = merge_reports(reports);
      merged.seed = cfg.seed;
      merged.write(out_dir + "/report.json");
    } else if (!reports.empty()) {
      reports.front().write(out_dir + "/report.json");
    }
    return all_pass ? 0 : 1;
  }

  if (*merge_cmd) {
    std::vector<StatReport> reports;
    for (const std::string& path : merge_inputs) reports.push_back(load_report(path));
    StatReport merged = merge_reports(reports);
    merged.write(merge_output);
    std::cout << merged.summary_lines();
    return merged.pass ? 0 : 1;
  }
  return 2;
}
