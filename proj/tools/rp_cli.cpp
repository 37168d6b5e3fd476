// Command-line front end: drive experiments and verification suites, emit
// CSV/JSON artifacts. Exit codes: 0 success, 1 solver divergence or failed
// verification, 2 configuration error.
#include <chrono>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rp/drivers.hpp"
#include "rp/io.hpp"
#include "rp/sensitivity.hpp"
#include "rp/verify.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

struct CommonOpts {
  std::string driver = "smooth-sin:N=4096";
  std::string field = "linear:lambda=0.5";
  double p = 2.0;
  int N = 0;  // overrides the driver's N when positive
  std::uint64_t seed = 7;
  double tol = 1e-10;
  std::string out = "rp_out";
  std::string format = "json";
  int jobs = 1;
  std::string config;  // JSON file (or manifest) whose config overrides flags
};

// Loads a config JSON, or the "config" block of a manifest, over the flags.
// The output prefix stays flag-controlled so reruns can target a fresh
// directory.
void apply_config(CommonOpts& o, std::string* kind, std::string* deltas, double* delta,
                  std::string* a_str) {
  if (o.config.empty()) return;
  json j = rp::read_json(o.config);
  if (j.contains("config")) j = j.at("config");
  if (j.contains("driver")) o.driver = j.at("driver").get<std::string>();
  if (j.contains("field")) o.field = j.at("field").get<std::string>();
  if (j.contains("p")) o.p = j.at("p").get<double>();
  if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("tol")) o.tol = j.at("tol").get<double>();
  if (j.contains("format")) o.format = j.at("format").get<std::string>();
  if (j.contains("jobs")) o.jobs = j.at("jobs").get<int>();
  if (kind && j.contains("kind")) *kind = j.at("kind").get<std::string>();
  if (delta && j.contains("delta")) *delta = j.at("delta").get<double>();
  if (deltas && j.contains("deltas")) {
    std::string list;
    for (const auto& d : j.at("deltas")) list += (list.empty() ? "" : ",") + rp::format_full(d.get<double>());
    *deltas = list;
  }
  if (a_str && j.contains("a")) {
    std::string list;
    for (const auto& v : j.at("a")) list += (list.empty() ? "" : ",") + rp::format_full(v.get<double>());
    *a_str = list;
  }
}

void write_manifest(const std::string& command, const json& config, const std::string& out,
                    double wall_ms) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["version"] = kVersion;
  m["wall_ms"] = wall_ms;
  rp::write_json(m, out + ".manifest.json");
}

rp::DriverSpec make_spec(const CommonOpts& o) {
  rp::DriverSpec spec = rp::DriverSpec::parse(o.driver);
  if (o.N > 0) spec.N = o.N;
  spec.seed = o.seed;
  return spec;
}

json echo_config(const CommonOpts& o, const rp::DriverSpec& spec) {
  json c;
  c["driver"] = spec.canonical_string();
  c["field"] = o.field;
  c["p"] = o.p;
  c["seed"] = o.seed;
  c["tol"] = o.tol;
  c["format"] = o.format;
  c["jobs"] = o.jobs;
  return c;
}

int run_fbm(const CommonOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  rp::DriverSpec spec = make_spec(o);
  spec.kind = rp::DriverSpec::Kind::fbm;
  const rp::DiscretePath x = rp::sample_fbm(spec);
  rp::write_path_csv(x, o.out + ".csv");
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_manifest("fbm", echo_config(o, spec), o.out, ms);
  return 0;
}

int run_lift(const CommonOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const rp::DriverSpec spec = make_spec(o);
  const rp::RoughPath X = rp::make_rough_driver(spec, o.p);
  rp::write_rough_json(X, o.out + ".rough.json", /*n_redundant_checks=*/8);
  if (o.format == "csv") rp::write_path_csv(X.path(), o.out + ".csv");
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_manifest("lift", echo_config(o, spec), o.out, ms);
  return 0;
}

int run_solve(const CommonOpts& o, const std::string& a_str) {
  const auto t0 = std::chrono::steady_clock::now();
  const rp::DriverSpec spec = make_spec(o);
  auto X = std::make_shared<rp::RoughPath>(rp::make_rough_driver(spec, o.p));
  const rp::VectorField f = rp::make_field(o.field);
  rp::Vec a(static_cast<size_t>(f.in_dim), 1.0);
  if (!a_str.empty()) {
    std::stringstream ss(a_str);
    std::string cell;
    size_t i = 0;
    while (std::getline(ss, cell, ',') && i < a.size()) a[i++] = std::stod(cell);
  }
  rp::SolveSpec sspec;
  sspec.tol = o.tol;
  const rp::RoughSolution sol = rp::solve_rough(a, rp::Mat(), f, rp::canonical_crp(X), sspec);
  rp::write_json(rp::solution_report_to_json(sol), o.out + ".solution.json");
  rp::write_json(rp::crp_to_json(sol.y, o.out + ".rough.json"), o.out + ".crp.json");
  rp::write_rough_json(*X, o.out + ".rough.json");
  if (o.format == "csv") {
    rp::DiscretePath ypath(X->grid(), f.in_dim);
    ypath.values = sol.y.values();
    rp::write_path_csv(ypath, o.out + ".csv");
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json cfg = echo_config(o, spec);
  cfg["a"] = a;
  write_manifest("solve", cfg, o.out, ms);
  return 0;
}

int run_jacobian(const CommonOpts& o, double delta) {
  const auto t0 = std::chrono::steady_clock::now();
  const rp::DriverSpec spec = make_spec(o);
  auto X = std::make_shared<rp::RoughPath>(rp::make_rough_driver(spec, o.p));
  const rp::VectorField f = rp::make_field(o.field);
  const rp::Vec a(static_cast<size_t>(f.in_dim), 0.4);
  rp::SolveSpec sspec;
  sspec.tol = std::min(o.tol, delta * delta / 100.0);
  const rp::ControlledPath Z = rp::canonical_crp(X);
  const int t_idx = X->grid().steps();
  const rp::JacobianFlow jf = rp::jacobian_flow(a, f, Z, sspec, 0, t_idx);
  const rp::Mat fd = rp::jacobian_fd(a, f, Z, sspec, 0, t_idx, delta);
  json rep;
  json mj = json::array(), fj = json::array();
  for (int i = 0; i < f.in_dim; ++i) {
    json mrow = json::array(), frow = json::array();
    for (int j = 0; j < f.in_dim; ++j) {
      mrow.push_back(jf.M.back()(i, j));
      frow.push_back(fd(i, j));
    }
    mj.push_back(mrow);
    fj.push_back(frow);
  }
  rep["M"] = mj;
  rep["fd"] = fj;
  rep["rel_gap"] = rp::op_norm(jf.M.back() - fd) / std::max(1e-300, rp::op_norm(fd));
  rp::write_json(rep, o.out + ".jacobian.json");
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json cfg = echo_config(o, spec);
  cfg["delta"] = delta;
  write_manifest("jacobian", cfg, o.out, ms);
  return 0;
}

int run_scan(const CommonOpts& o, const std::string& kind, const std::string& deltas_csv) {
  const auto t0 = std::chrono::steady_clock::now();
  const rp::DriverSpec spec = make_spec(o);
  rp::RdeProblem base;
  base.f = rp::make_field(o.field);
  base.a = rp::Vec(static_cast<size_t>(base.f.in_dim), 0.7);
  base.X = std::make_shared<rp::RoughPath>(rp::make_rough_driver(spec, o.p));
  base.spec.tol = o.tol;

  rp::PerturbationSpec pert;
  pert.jobs = o.jobs;
  if (kind == "initial") {
    pert.kind = rp::PerturbationSpec::Kind::initial_point;
    pert.direction = rp::Vec(static_cast<size_t>(base.f.in_dim), 1.0);
  } else if (kind == "field") {
    pert.kind = rp::PerturbationSpec::Kind::field_direction;
    pert.field_direction = rp::make_field("const:dv=" + std::to_string(base.f.in_dim) +
                                          ",du=" + std::to_string(base.f.cols) + ",c=1");
  } else if (kind == "dilation") {
    pert.kind = rp::PerturbationSpec::Kind::dilation;
  } else if (kind == "translation") {
    pert.kind = rp::PerturbationSpec::Kind::translation;
    rp::DiscretePath h(base.X->grid(), base.X->dim());
    for (int i = 0; i < h.grid.size(); ++i)
      for (int c = 0; c < h.dim; ++c)
        h.values[static_cast<size_t>(i)][static_cast<size_t>(c)] =
            0.4 * std::sin(3.0 * h.grid.t(i) + c);
    pert.h_direction = h;
    pert.q_h = 1.0;
  } else {
    throw rp::ConfigError("unknown scan kind: " + kind);
  }
  std::stringstream ss(deltas_csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) pert.sizes.push_back(std::stod(cell));

  const rp::ScanReport rep = rp::perturbation_response(base, pert);
  rp::write_json(rp::scan_report_to_json(rep), o.out + ".scan.json");
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json cfg = echo_config(o, spec);
  cfg["kind"] = kind;
  cfg["deltas"] = pert.sizes;
  write_manifest("scan", cfg, o.out, ms);
  return 0;
}

int run_verify(const CommonOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const rp::VerifyReport rep = rp::verify_suite(o.seed);
  rp::write_json(rep.to_json(), o.out + ".verify.json");
  for (const rp::CheckResult& c : rep.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  measured=" << c.measured
              << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json cfg;
  cfg["seed"] = o.seed;
  write_manifest("verify", cfg, o.out, ms);
  return rep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rough-path calculus toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string a_str, kind = "initial", deltas = "1e-2,1e-3,1e-4";
  double delta = 1e-4;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--driver", o.driver, "driver spec, e.g. fbm:H=0.4,d=2,N=4096,seed=7");
    cmd->add_option("--field", o.field, "field spec, e.g. linear:lambda=0.5");
    cmd->add_option("--p", o.p, "variation index of the lift");
    cmd->add_option("--N", o.N, "grid-size override");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--tol", o.tol, "solver tolerance");
    cmd->add_option("--out", o.out, "output path prefix");
    cmd->add_option("--format", o.format, "csv or json");
    cmd->add_option("--jobs", o.jobs, "worker pool size for sweeps");
    cmd->add_option("--config", o.config, "JSON config or manifest; overrides flags");
  };

  CLI::App* fbm = app.add_subcommand("fbm", "sample fractional Brownian motion to CSV");
  add_common(fbm);
  CLI::App* lift = app.add_subcommand("lift", "build a level-2 rough path and write JSON");
  add_common(lift);
  CLI::App* solve = app.add_subcommand("solve", "solve the rough differential equation");
  add_common(solve);
  solve->add_option("--a", a_str, "initial point, comma separated");
  CLI::App* jac =
      app.add_subcommand("jacobian", "Jacobian flow with a finite-difference cross-check");
  add_common(jac);
  jac->add_option("--delta", delta, "central-difference step");
  CLI::App* scan = app.add_subcommand("scan", "perturbation-response scan");
  add_common(scan);
  scan->add_option("--kind", kind, "initial | field | dilation | translation");
  scan->add_option("--deltas", deltas, "comma-separated perturbation sizes, decreasing");
  CLI::App* verify = app.add_subcommand("verify", "run the library invariant suite");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  try {
    apply_config(o, &kind, &deltas, &delta, &a_str);
    if (fbm->parsed()) return run_fbm(o);
    if (lift->parsed()) return run_lift(o);
    if (solve->parsed()) return run_solve(o, a_str);
    if (jac->parsed()) return run_jacobian(o, delta);
    if (scan->parsed()) return run_scan(o, kind, deltas);
    if (verify->parsed()) return run_verify(o);
  } catch (const rp::DivergenceError& e) {
    std::cerr << "solver divergence: " << e.what() << "\n";
    return 1;
  } catch (const rp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
