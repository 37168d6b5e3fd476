#include "rp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rp {

using nlohmann::json;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_path_csv(const DiscretePath& x, const std::string& file) {
  x.check();
  std::ofstream os(file);
  if (!os) throw ConfigError("cannot open for writing: " + file);
  os << "t";
  for (int c = 1; c <= x.dim; ++c) os << ",x" << c;
  os << "\n";
  for (int i = 0; i < x.grid.size(); ++i) {
    os << format_full(x.grid.t(i));
    for (double v : x.values[static_cast<size_t>(i)]) os << "," << format_full(v);
    os << "\n";
  }
}

DiscretePath read_path_csv(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open: " + file);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV: " + file);
  std::vector<double> times;
  std::vector<Vec> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.empty()) continue;
    times.push_back(row.front());
    values.emplace_back(row.begin() + 1, row.end());
  }
  DiscretePath out;
  out.grid = Grid(std::move(times));
  out.dim = static_cast<int>(values.front().size());
  out.values = std::move(values);
  out.check();
  return out;
}

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j.at(0).size()) : 0;
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = j.at(static_cast<size_t>(i)).at(static_cast<size_t>(c)).get<double>();
  return m;
}

}  // namespace

json rough_to_json(const RoughPath& x, int n_redundant_checks) {
  json j;
  j["dim"] = x.dim();
  j["p"] = x.p();
  j["grid"] = x.grid().times();
  j["start"] = x.start();
  json steps = json::array();
  for (const Tensor2& s : x.steps()) {
    json e;
    e["lvl1"] = s.level1;
    e["lvl2"] = mat_to_json(s.level2);
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  if (n_redundant_checks > 0) {
    json checks = json::array();
    const int n = x.grid().size();
    for (int k = 0; k < n_redundant_checks; ++k) {
      const int i = (k * 7919) % (n - 1);
      const int jj = i + 1 + ((k * 104729) % (n - 1 - i));
      const Tensor2 inc = x.increment(i, jj);
      json e;
      e["i"] = i;
      e["j"] = jj;
      e["lvl1"] = inc.level1;
      e["lvl2"] = mat_to_json(inc.level2);
      checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
  }
  return j;
}

RoughPath rough_from_json(const json& j, double* redundancy_defect) {
  const int dim = j.at("dim").get<int>();
  Grid grid(j.at("grid").get<std::vector<double>>());
  Vec start = j.at("start").get<Vec>();
  std::vector<Tensor2> steps;
  for (const json& e : j.at("steps")) {
    Tensor2 s(dim);
    s.level1 = e.at("lvl1").get<Vec>();
    s.level2 = mat_from_json(e.at("lvl2"));
    steps.push_back(std::move(s));
  }
  RoughPath out(std::move(grid), std::move(start), std::move(steps), j.at("p").get<double>());
  if (redundancy_defect) {
    *redundancy_defect = 0;
    if (j.contains("checks")) {
      for (const json& e : j.at("checks")) {
        const Tensor2 inc = out.increment(e.at("i").get<int>(), e.at("j").get<int>());
        const Vec lvl1 = e.at("lvl1").get<Vec>();
        const Mat lvl2 = mat_from_json(e.at("lvl2"));
        *redundancy_defect = std::max(
            {*redundancy_defect, norm_inf(inc.level1 - lvl1), max_abs(inc.level2 - lvl2)});
      }
    }
  }
  return out;
}

void write_rough_json(const RoughPath& x, const std::string& file, int n_redundant_checks) {
  write_json(rough_to_json(x, n_redundant_checks), file);
}

RoughPath read_rough_json(const std::string& file, double* redundancy_defect) {
  return rough_from_json(read_json(file), redundancy_defect);
}

json crp_to_json(const ControlledPath& y, const std::string& rough_ref) {
  json j;
  j["rough_ref"] = rough_ref;
  json vals = json::array(), dags = json::array();
  for (const Vec& v : y.values()) vals.push_back(v);
  for (const Mat& d : y.daggers()) dags.push_back(mat_to_json(d));
  j["y"] = std::move(vals);
  j["ydag"] = std::move(dags);
  j["p"] = y.indices().p;
  j["q"] = y.indices().q;
  j["r"] = y.indices().r;
  return j;
}

json defect_scan_to_json(const DefectScan& scan) {
  json j;
  j["C_hat"] = scan.C_hat;
  j["theta_hat"] = scan.theta_hat;
  j["n_triples"] = scan.n_triples;
  j["residual"] = scan.residual;
  j["identifiable"] = scan.identifiable;
  return j;
}

json scan_report_to_json(const ScanReport& rep) {
  json j;
  j["kind"] = rep.kind;
  j["deltas"] = rep.deltas;
  json responses = json::array();
  for (double r : rep.responses) {
    if (std::isfinite(r))
      responses.push_back(r);
    else
      responses.push_back(nullptr);
  }
  j["responses"] = std::move(responses);
  j["slope"] = rep.slope;
  j["r2"] = rep.r2;
  j["flags"] = rep.flags;
  return j;
}

json solution_report_to_json(const RoughSolution& sol) {
  json j;
  json windows = json::array();
  const Grid& g = sol.y.grid();
  for (const WindowStat& w : sol.windows) {
    json e;
    e["t0"] = g.t(w.i0);
    e["t1"] = g.t(w.i1);
    e["iters"] = w.iters;
    e["residual"] = w.residual;
    windows.push_back(std::move(e));
  }
  j["windows"] = std::move(windows);
  j["yT"] = sol.y.values().back();
  const CrpNorms norms = crp_norms(sol.y);
  j["norms"] = {{"dag_q", norms.dag_q},
                {"sharp_r", norms.sharp_r},
                {"x", norms.norm_x},
                {"x_full", norms.norm_x_full}};
  return j;
}

void write_json(const json& j, const std::string& file) {
  std::ofstream os(file);
  if (!os) throw ConfigError("cannot open for writing: " + file);
  os << j.dump(2) << "\n";
}

json read_json(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open: " + file);
  json j;
  is >> j;
  return j;
}

}  // namespace rp
