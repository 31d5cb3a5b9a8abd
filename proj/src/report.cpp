#include "loopsoup/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace loopsoup {

void StatReport::add_p_row(std::string name, double stat, double p, long n, std::string note) {
  CheckRow r;
  r.name = std::move(name);
  r.statistic = stat;
  r.p_value = p;
  r.n = n;
  r.note = std::move(note);
  rows.push_back(std::move(r));
}

void StatReport::add_bound_row(std::string name, double stat, double bound, long n,
                               std::string note) {
  CheckRow r;
  r.name = std::move(name);
  r.statistic = stat;
  r.bound = bound;
  r.n = n;
  r.note = std::move(note);
  rows.push_back(std::move(r));
}

void StatReport::add_target_row(std::string name, double stat, double target, double se, long n,
                                double z, std::string note) {
  CheckRow r;
  r.name = std::move(name);
  r.statistic = stat;
  r.target = target;
  r.se = se;
  r.z = z;
  r.n = n;
  r.note = std::move(note);
  rows.push_back(std::move(r));
}

void StatReport::add_info_row(std::string name, double stat, long n, std::string note) {
  CheckRow r;
  r.name = std::move(name);
  r.statistic = stat;
  r.n = n;
  r.pass = true;
  r.note = std::move(note);
  r.note = r.note.empty() ? "info" : r.note + " (info)";
  rows.push_back(std::move(r));
}

void StatReport::finalize() {
  long p_rows = 0;
  for (const CheckRow& r : rows)
    if (r.p_value) ++p_rows;
  const double threshold = p_rows > 0 ? alpha / static_cast<double>(p_rows) : alpha;
  pass = true;
  for (CheckRow& r : rows) {
    if (r.p_value) r.pass = *r.p_value > threshold;
    else if (r.bound) r.pass = r.statistic <= *r.bound;
    else if (r.target) r.pass = std::abs(r.statistic - *r.target) <= r.z * (r.se ? *r.se : 0.0);
    pass = pass && r.pass;
  }
}

nlohmann::json StatReport::body_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["config"] = config;
  j["alpha"] = alpha;
  j["pass"] = pass;
  auto arr = nlohmann::json::array();
  for (const CheckRow& r : rows) {
    nlohmann::json row;
    row["name"] = r.name;
    row["statistic"] = r.statistic;
    if (r.p_value) row["p_value"] = *r.p_value;
    if (r.bound) row["bound"] = *r.bound;
    if (r.target) {
      row["target"] = *r.target;
      row["se"] = r.se ? *r.se : 0.0;
      row["z"] = r.z;
    }
    row["n"] = r.n;
    row["pass"] = r.pass;
    if (!r.note.empty()) row["note"] = r.note;
    arr.push_back(std::move(row));
  }
  j["rows"] = arr;
  return j;
}

nlohmann::json StatReport::full_json() const {
  nlohmann::json j = body_json();
  j["wall_ms"] = wall_ms;
  return j;
}

void StatReport::write(const std::string& path) const {
  std::ofstream out(path);
  out << full_json().dump(2) << "\n";
}

std::string StatReport::summary_lines() const {
  std::ostringstream out;
  for (const CheckRow& r : rows) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << experiment << "/" << r.name
        << "  stat=" << r.statistic;
    if (r.p_value) out << " p=" << *r.p_value;
    if (r.bound) out << " bound=" << *r.bound;
    if (r.target) out << " target=" << *r.target << " se=" << (r.se ? *r.se : 0.0);
    out << " n=" << r.n;
    if (!r.note.empty()) out << "  [" << r.note << "]";
    out << "\n";
  }
  return out.str();
}

StatReport merge_reports(const std::vector<StatReport>& reports) {
  StatReport out;
  out.experiment = "merged";
  out.pass = true;
  for (const StatReport& r : reports) {
    for (const CheckRow& row : r.rows) {
      CheckRow copy = row;
      copy.name = r.experiment + "/" + row.name;
      out.rows.push_back(std::move(copy));
    }
    out.pass = out.pass && r.pass;
    out.wall_ms += r.wall_ms;
  }
  return out;
}

StatReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  nlohmann::json j;
  in >> j;
  StatReport r;
  r.experiment = j.value("experiment", "");
  r.seed = j.value("seed", uint64_t{0});
  r.config = j.value("config", nlohmann::json::object());
  r.alpha = j.value("alpha", 0.01);
  r.pass = j.value("pass", false);
  r.wall_ms = j.value("wall_ms", 0.0);
  for (const auto& row : j.value("rows", nlohmann::json::array())) {
    CheckRow c;
    c.name = row.value("name", "");
    c.statistic = row.value("statistic", 0.0);
    if (row.contains("p_value")) c.p_value = row["p_value"].get<double>();
    if (row.contains("bound")) c.bound = row["bound"].get<double>();
    if (row.contains("target")) {
      c.target = row["target"].get<double>();
      c.se = row.value("se", 0.0);
      c.z = row.value("z", 3.0);
    }
    c.n = row.value("n", 0L);
    c.pass = row.value("pass", false);
    c.note = row.value("note", "");
    r.rows.push_back(std::move(c));
  }
  return r;
}

}  // namespace loopsoup
