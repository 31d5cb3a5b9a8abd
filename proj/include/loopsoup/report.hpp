#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace loopsoup {

// One verification row. Rows carrying a p-value are judged against the
// Bonferroni-corrected threshold at finalize; bound and interval rows are
// judged directly.
struct CheckRow {
  std::string name;
  double statistic = 0.0;
  std::optional<double> p_value;
  std::optional<double> bound;       // pass when statistic <= bound
  std::optional<double> target;      // pass when |statistic - target| <= z * se
  std::optional<double> se;
  double z = 3.0;
  long n = 0;
  bool pass = false;
  std::string note;
};

struct StatReport {
  std::string experiment;
  uint64_t seed = 0;
  nlohmann::json config;
  std::vector<CheckRow> rows;
  double alpha = 0.01;  // per-report family level, split across p-rows
  bool pass = false;
  double wall_ms = 0.0;

  void add_p_row(std::string name, double stat, double p, long n, std::string note = "");
  void add_bound_row(std::string name, double stat, double bound, long n, std::string note = "");
  void add_target_row(std::string name, double stat, double target, double se, long n,
                      double z = 3.0, std::string note = "");
  void add_info_row(std::string name, double stat, long n, std::string note = "");

  // applies the Bonferroni threshold to p-rows and folds the overall verdict
  void finalize();

  // deterministic body (everything except wall-clock)
  nlohmann::json body_json() const;
  nlohmann::json full_json() const;
  void write(const std::string& path) const;
  std::string summary_lines() const;
};

StatReport merge_reports(const std::vector<StatReport>& reports);
StatReport load_report(const std::string& path);

}  // namespace loopsoup
