#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spider/hjb.hpp"
#include "spider/io.hpp"
#include "spider/numerics.hpp"
#include "spider/problem.hpp"
#include "spider/sim.hpp"
#include "spider/testfn.hpp"

namespace {

constexpr const char* kVersion = "spiderhjb 1.0.0";
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerificationFailed = 2;

using spider::RunConfig;

// Shared section/key parser for the small auxiliary file formats.
using Sections = std::map<std::string, std::map<std::string, std::string>>;

Sections read_sections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Sections out;
  std::string line, current;
  int lineno = 0;
  auto trim = [](std::string s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    const std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      current = trim(line.substr(1, line.size() - 2));
      out[current];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || current.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    out[current][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

double require_double(const Sections& s, const std::string& sec, const std::string& key) {
  auto si = s.find(sec);
  if (si == s.end()) throw std::runtime_error("missing section [" + sec + "]");
  auto ki = si->second.find(key);
  if (ki == si->second.end()) {
    throw std::runtime_error("missing key '" + key + "' in [" + sec + "]");
  }
  return std::stod(ki->second);
}

double optional_double(const Sections& s, const std::string& sec, const std::string& key,
                       double fallback) {
  auto si = s.find(sec);
  if (si == s.end()) return fallback;
  auto ki = si->second.find(key);
  return ki == si->second.end() ? fallback : std::stod(ki->second);
}

std::string optional_string(const Sections& s, const std::string& sec,
                            const std::string& key, const std::string& fallback) {
  auto si = s.find(sec);
  if (si == s.end()) return fallback;
  auto ki = si->second.find(key);
  return ki == si->second.end() ? fallback : ki->second;
}

spider::SliceSpec parse_slice(const std::string& text) {
  spider::SliceSpec spec;
  if (text == "vertex-line") {
    spec.kind = spider::SliceKind::kVertexLine;
    return spec;
  }
  std::stringstream ss(text);
  std::string kind, ray, value;
  if (!std::getline(ss, kind, ':') || !std::getline(ss, ray, ':') ||
      !std::getline(ss, value, ':')) {
    throw std::invalid_argument("slice must be vertex-line, fixed-l:RAY:L or fixed-x:RAY:X");
  }
  if (kind == "fixed-l") {
    spec.kind = spider::SliceKind::kFixedL;
  } else if (kind == "fixed-x") {
    spec.kind = spider::SliceKind::kFixedX;
  } else {
    throw std::invalid_argument("unknown slice kind: " + kind);
  }
  spec.ray = std::stoi(ray) - 1;
  spec.value = std::stod(value);
  return spec;
}

// Frozen-control dynamics from a problem file with singleton control sets.
// The sigma coefficient enters as the generator coefficient: the simulated
// process has generator sigma d^2/dx^2 + b d/dx, matching the ray operator
// of the solver (see README, conventions).
spider::SpiderDynamics dynamics_from_problem(const spider::ProblemData& data) {
  for (const auto& c : data.ray_controls) {
    if (c.size() != 1) {
      throw std::runtime_error("simulate requires singleton ray control sets");
    }
  }
  if (data.vertex_control.size() != 1) {
    throw std::runtime_error("simulate requires a singleton vertex control set");
  }
  spider::SpiderDynamics dyn;
  dyn.ray_count = data.network.ray_count;
  const auto theta = data.vertex_control.points[0];
  dyn.diffusion = [data](int ray, double x, double l) {
    spider::EvalContext ctx;
    ctx.x = x;
    ctx.l = l;
    ctx.beta = data.ray_controls[static_cast<std::size_t>(ray)].points[0][0];
    return data.sigma[static_cast<std::size_t>(ray)].eval(ctx);
  };
  dyn.drift = [data](int ray, double x, double l) {
    spider::EvalContext ctx;
    ctx.x = x;
    ctx.l = l;
    ctx.beta = data.ray_controls[static_cast<std::size_t>(ray)].points[0][0];
    return data.drift[static_cast<std::size_t>(ray)].eval(ctx);
  };
  dyn.spin = [data, theta](int ray, double l) {
    spider::EvalContext ctx;
    ctx.l = l;
    ctx.theta = theta;
    return data.spin[static_cast<std::size_t>(ray)].eval(ctx);
  };
  // Spin normalization over a sample of local times.
  for (int k = 0; k <= 20; ++k) {
    const double l = data.network.local_time_bound * k / 20.0;
    double total = 0.0;
    for (int i = 0; i < dyn.ray_count; ++i) total += dyn.spin(i, l);
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::runtime_error("spin weights must sum to 1 for every l (off at l = " +
                               spider::format_full(l) + ")");
    }
  }
  return dyn;
}

int run_validate(const RunConfig& config) {
  auto data = spider::load_problem(config.problem_path);
  auto report = spider::validate_assumptions(data, config.samples, 0.0);
  std::printf("samples per axis: %d\n", report.samples_per_axis);
  std::printf("spin weights:  [%.6g, %.6g]  (S) %s\n", report.zeta_lower, report.zeta_upper,
              report.pass_spin ? "PASS" : "FAIL");
  std::printf("ellipticity:   [%.6g, %.6g]  (E) %s\n", report.sigma_lower,
              report.sigma_upper, report.pass_ellipticity ? "PASS" : "FAIL");
  std::printf("drift bound:   %.6g\n", report.drift_bound);
  std::printf("cost bound:    %.6g\n", report.cost_bound);
  std::printf("regularity:    (R-i..v) %s %s %s %s %s\n",
              report.pass_reg_drift ? "PASS" : "FAIL",
              report.pass_reg_sigma ? "PASS" : "FAIL",
              report.pass_reg_cost ? "PASS" : "FAIL",
              report.pass_reg_spin ? "PASS" : "FAIL",
              report.pass_reg_junction ? "PASS" : "FAIL");
  return report.all_pass() ? kExitOk : kExitVerificationFailed;
}

int run_solve(const RunConfig& config, const std::string& slice_text,
              const std::string& slice_out, bool second_order_flux) {
  auto data = spider::load_problem(config.problem_path);
  auto grid = spider::build_grid(data.network, config.nx, config.nl);
  spider::SolverOptions options;
  options.tol = config.tol;
  options.threads = config.threads;
  options.second_order_flux = second_order_flux;
  auto report = spider::march_local_time(data, grid, options);
  std::printf("solved %dx%d grid on %d rays in %.3f s\n", config.nx, config.nl,
              data.network.ray_count, report.seconds);
  std::printf("max interior residual:  %.3e\n", report.max_interior_residual);
  std::printf("max kirchhoff residual: %.3e\n", report.max_kirchhoff_residual);
  if (!config.out_path.empty()) {
    spider::write_solution(report.solution, config.out_path);
    std::printf("wrote %s\n", config.out_path.c_str());
  }
  if (!slice_text.empty()) {
    if (slice_out.empty()) throw std::invalid_argument("--slice requires --slice-out");
    spider::export_plot_data(report.solution, parse_slice(slice_text), slice_out);
    std::printf("wrote %s\n", slice_out.c_str());
  }
  return kExitOk;
}

int run_verify_comparison(const RunConfig& config) {
  auto data = spider::load_problem(config.problem_path);
  auto grid = spider::build_grid(data.network, config.nx, config.nl);
  spider::SolverOptions options;
  options.tol = config.tol;
  options.threads = config.threads;
  auto report =
      spider::verify_comparison(data, grid, config.trials, config.seed, options, config.delta);
  for (std::size_t t = 0; t < report.trials.size(); ++t) {
    const auto& trial = report.trials[t];
    std::printf("trial %2zu: delta=%.4f shift=%.4f min_gap=%+.3e %s\n", t, trial.delta,
                trial.shift, trial.min_gap, trial.ordering_holds ? "ordered" : "VIOLATION");
    if (!trial.ordering_holds) {
      std::printf("  worst node: ray %d, x index %d, l index %d\n",
                  trial.worst_location.ray + 1, trial.worst_location.x_index,
                  trial.worst_location.l_index);
    }
  }
  std::printf("%d/%zu trials ordered\n",
              static_cast<int>(report.trials.size()) - report.failures,
              report.trials.size());
  return report.all_ordered() ? kExitOk : kExitVerificationFailed;
}

int run_solve_static(const RunConfig& config) {
  auto data = spider::load_problem(config.problem_path);
  auto grid = spider::build_grid(data.network, config.nx, config.nl);
  spider::SolverOptions options;
  options.tol = config.tol;
  options.threads = config.threads;
  auto result = spider::solve_l_independent(data, grid, config.eps_schedule, options);
  for (std::size_t j = 0; j < result.cauchy_gaps.size(); ++j) {
    std::printf("gap |slice(eps=%.4g) - slice(eps=%.4g)| = %.3e\n", result.eps_used[j],
                result.eps_used[j + 1], result.cauchy_gaps[j]);
  }
  std::printf("l-variation of extracted slice: %.3e\n", result.l_variation);
  std::printf("extrapolation check: %.3e\n", result.extrapolation_gap);
  if (!config.out_path.empty()) {
    std::ofstream out(config.out_path);
    if (!out) throw std::runtime_error("cannot open " + config.out_path);
    out << "ray,x,u\n";
    for (std::size_t i = 0; i < result.slice.size(); ++i) {
      for (std::size_t j = 0; j < result.slice[i].size(); ++j) {
        out << (i + 1) << ',' << spider::format_full(grid.x_nodes[j]) << ','
            << spider::format_full(result.slice[i][j]) << '\n';
      }
    }
    std::printf("wrote %s\n", config.out_path.c_str());
  }
  return kExitOk;
}

spider::TestFunctionSpec collar_spec_from(const Sections& sections,
                                          const std::string& section,
                                          bool width_required = true) {
  spider::TestFunctionSpec spec;
  spec.reaction = require_double(sections, section, "reaction");
  spec.grad_coef = optional_double(sections, section, "grad_coef", 0.0);
  spec.forcing = optional_double(sections, section, "forcing", 0.0);
  spec.width = width_required ? require_double(sections, section, "width")
                              : optional_double(sections, section, "width", 0.1);
  spec.l_halfwidth = optional_double(sections, section, "l_halfwidth", 0.0);
  spec.eta = optional_double(sections, section, "eta", 0.0);
  spec.gamma = optional_double(sections, section, "gamma", 0.0);
  spec.vertex_value = optional_double(sections, section, "vertex_value", 0.0);
  spec.absorb_scale = optional_double(sections, section, "absorb_scale", 1.0);
  spec.center_l = optional_double(sections, section, "center_l", 0.5);
  spec.far_values =
      spider::parse_double_list(optional_string(sections, section, "far_values", "0"));
  return spec;
}

int run_testfn_solve(const RunConfig& config) {
  Sections sections = read_sections(config.spec_path);
  spider::TestFunctionSpec spec = collar_spec_from(sections, "collar");
  const std::string slope_text = optional_string(sections, "collar", "slope", "");
  spec.vertex_slope =
      slope_text.empty() ? spider::compute_S_beta(spec) : std::stod(slope_text);
  auto tf = spider::solve_param_ode(spec);
  std::printf("vertex slope: %.12g%s\n", spec.vertex_slope,
              slope_text.empty() ? " (absorption formula)" : "");
  std::printf("max residual: %.3e\n", tf.max_residual());
  std::printf("sup bound:    %.6g (max |psi| %.6g)\n", spider::sup_bound_M(spec),
              [&] {
                double worst = 0.0;
                for (double v : tf.values) worst = std::max(worst, std::abs(v));
                return worst;
              }());
  std::printf("flux identity defect: %.3e\n", tf.flux_identity_defect());
  std::printf("absorption: %s\n", spider::absorption_check(tf, spec) ? "PASS" : "FAIL");
  if (!config.out_path.empty()) {
    std::ofstream out(config.out_path);
    if (!out) throw std::runtime_error("cannot open " + config.out_path);
    out << "ray,l,x,psi,dpsi,d2psi\n";
    for (int ray = 0; ray < spec.ray_count(); ++ray) {
      for (std::size_t li = 0; li < tf.l_nodes.size(); ++li) {
        for (std::size_t xi = 0; xi < tf.x_nodes.size(); ++xi) {
          out << (ray + 1) << ',' << spider::format_full(tf.l_nodes[li]) << ','
              << spider::format_full(tf.x_nodes[xi]) << ','
              << spider::format_full(tf.at(ray, static_cast<int>(li), static_cast<int>(xi)))
              << ','
              << spider::format_full(
                     tf.slope_at(ray, static_cast<int>(li), static_cast<int>(xi)))
              << ','
              << spider::format_full(
                     tf.curvature_at(ray, static_cast<int>(li), static_cast<int>(xi)))
              << '\n';
        }
      }
    }
    std::printf("wrote %s\n", config.out_path.c_str());
  }
  return spider::absorption_check(tf, spec) ? kExitOk : kExitVerificationFailed;
}

int run_testfn_study(const RunConfig& config) {
  Sections sections = read_sections(config.schedule_path);
  spider::TestFunctionSpec base = collar_spec_from(sections, "base", false);
  const int rays = static_cast<int>(optional_double(sections, "base", "rays", 1));
  auto si = sections.find("schedule");
  if (si == sections.end()) throw std::runtime_error("missing [schedule] section");
  std::vector<spider::VanishingRow> schedule;
  for (int r = 1;; ++r) {
    auto ki = si->second.find("row_" + std::to_string(r));
    if (ki == si->second.end()) break;
    auto vals = spider::parse_double_list(ki->second);
    if (vals.size() != 5) {
      throw std::runtime_error("row_" + std::to_string(r) +
                               " needs width, l_halfwidth, eta, gamma, far_value");
    }
    spider::VanishingRow row;
    row.width = vals[0];
    row.l_halfwidth = vals[1];
    row.eta = vals[2];
    row.gamma = vals[3];
    row.far_values.assign(static_cast<std::size_t>(rays), vals[4]);
    schedule.push_back(row);
  }
  if (schedule.empty()) throw std::runtime_error("empty schedule");
  base.far_values.assign(static_cast<std::size_t>(rays), base.vertex_value);
  auto rows = spider::vanishing_limit_study(base, schedule);
  std::printf("%10s %12s %12s %12s %14s %14s\n", "width", "l_halfwidth", "eta", "gamma",
              "slope", "deviation");
  for (const auto& row : rows) {
    std::printf("%10.4g %12.4g %12.4g %12.4g %14.6g %14.6g\n", row.width, row.l_halfwidth,
                row.eta, row.gamma, row.slope_used, row.deviation);
  }
  return kExitOk;
}

int run_oracle(double lambda, double sigma, double length, double right_value,
               const std::string& at_list) {
  spider::LinearOracle oracle{lambda, sigma, length, right_value};
  for (double x : spider::parse_double_list(at_list)) {
    std::printf("%s %s\n", spider::format_full(x).c_str(),
                spider::format_full(oracle(x)).c_str());
  }
  return kExitOk;
}

int run_simulate(const RunConfig& config) {
  auto data = spider::load_problem(config.problem_path);
  auto dyn = dynamics_from_problem(data);
  spider::SimParams params;
  params.dt = config.dt;
  params.horizon = config.horizon;
  params.seed = config.seed;
  params.threads = config.threads;
  auto local_time = spider::local_time_at_horizon(dyn, params, config.paths);
  auto occupation = spider::ray_occupation(dyn, params, std::min(config.paths, 2000));
  nlohmann::json doc;
  doc["params"] = {{"paths", config.paths}, {"dt", config.dt},   {"T", config.horizon},
                   {"seed", config.seed},   {"problem", config.problem_path}};
  doc["local_time"] = {{"estimate", local_time.estimate},
                       {"std_error", local_time.std_error},
                       {"paths", local_time.paths}};
  doc["ray_occupation"] = occupation;
  const std::string text = doc.dump(1);
  if (!config.report_path.empty()) {
    std::ofstream out(config.report_path);
    if (!out) throw std::runtime_error("cannot open " + config.report_path);
    out << text << '\n';
    std::printf("wrote %s\n", config.report_path.c_str());
  } else {
    std::printf("%s\n", text.c_str());
  }
  return kExitOk;
}

int run_identity_checks(const RunConfig& config) {
  Sections sections = read_sections(config.schedule_path);
  const int rays = static_cast<int>(optional_double(sections, "dynamics", "rays", 1));
  auto diff = spider::parse_double_list(
      optional_string(sections, "dynamics", "diffusion", "0.5"));
  auto drift = spider::parse_double_list(optional_string(sections, "dynamics", "drift", "0"));
  auto spin = spider::parse_double_list(
      optional_string(sections, "dynamics", "spin",
                      rays == 1 ? std::string("1") : std::string()));
  auto pick = [](const std::vector<double>& v, int i) {
    return v.size() == 1 ? v[0] : v.at(static_cast<std::size_t>(i));
  };
  spider::SpiderDynamics dyn;
  dyn.ray_count = rays;
  dyn.diffusion = [diff, pick](int ray, double, double) { return pick(diff, ray); };
  dyn.drift = [drift, pick](int ray, double, double) { return pick(drift, ray); };
  if (spin.empty()) throw std::runtime_error("spin weights required for rays > 1");
  dyn.spin = [spin, pick](int ray, double) { return pick(spin, ray); };

  spider::SimParams params;
  params.dt = optional_double(sections, "params", "dt", config.dt);
  params.horizon = optional_double(sections, "params", "T", config.horizon);
  params.seed = static_cast<std::uint64_t>(optional_double(sections, "params", "seed",
                                                           static_cast<double>(config.seed)));
  params.threads = config.threads;
  const int paths =
      static_cast<int>(optional_double(sections, "params", "paths", config.paths));

  nlohmann::json doc;
  doc["params"] = {{"paths", paths}, {"dt", params.dt}, {"T", params.horizon},
                   {"seed", params.seed}, {"rays", rays}};
  bool monotone = true;
  auto run_schedule = [&](const std::string& key, auto&& fn) {
    const std::string text = optional_string(sections, "checks", key, "");
    if (text.empty()) return;
    nlohmann::json rows = nlohmann::json::array();
    double prev = 1e300;
    for (double v : spider::parse_double_list(text)) {
      spider::EstimatorReport rep = fn(v);
      rows.push_back({{"parameter", v},
                      {"estimate", rep.estimate},
                      {"std_error", rep.std_error},
                      {"paths", rep.paths}});
      if (rep.estimate >= prev) monotone = false;
      prev = rep.estimate;
      std::printf("%-12s %8.4g: %12.6g +- %.3g\n", key.c_str(), v, rep.estimate,
                  rep.std_error);
    }
    doc[key] = std::move(rows);
  };
  run_schedule("downcrossing", [&](double eps) {
    return spider::downcrossing_deviation(dyn, params, paths, eps);
  });
  run_schedule("occupation", [&](double eps) {
    return spider::occupation_identity_check(dyn, params, paths, eps, params.horizon);
  });
  run_schedule("nonstick", [&](double delta) {
    return spider::non_stickiness_check(dyn, params, paths, delta);
  });
  doc["all_schedules_decreasing"] = monotone;
  if (!config.report_path.empty()) {
    std::ofstream out(config.report_path);
    out << doc.dump(1) << '\n';
    std::printf("wrote %s\n", config.report_path.c_str());
  }
  return monotone ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HJB systems on star networks with a local-time junction condition"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunConfig config;
  std::string config_path;

  // Flags override config-file values: the file is applied first.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }
  try {
    if (!config_path.empty()) config = spider::parse_run_config_file(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file (applied first)");
    sub->add_option("--threads", config.threads,
                    "worker threads (0: SPIDERHJB_THREADS or hardware)");
  };

  auto* validate = app.add_subcommand("validate", "sample the data assumptions");
  validate->add_option("--problem", config.problem_path, "problem file")->required();
  validate->add_option("--samples", config.samples, "samples per axis");
  add_common(validate);

  std::string slice_text, slice_out;
  bool second_order_flux = false;
  auto* solve = app.add_subcommand("solve", "march the local-time system");
  solve->add_option("--problem", config.problem_path, "problem file")->required();
  solve->add_option("--nx", config.nx, "x intervals per ray");
  solve->add_option("--nl", config.nl, "local-time intervals");
  solve->add_option("--tol", config.tol, "policy iteration tolerance");
  solve->add_option("--out", config.out_path, "solution output (.csv or .json)");
  solve->add_option("--slice", slice_text, "vertex-line | fixed-l:RAY:L | fixed-x:RAY:X");
  solve->add_option("--slice-out", slice_out, "plot table output path");
  solve->add_flag("--second-order-flux", second_order_flux,
                  "second-order one-sided vertex flux (accuracy studies)");
  add_common(solve);

  auto* verify = app.add_subcommand("verify-comparison", "discrete comparison harness");
  verify->add_option("--problem", config.problem_path, "problem file")->required();
  verify->add_option("--trials", config.trials, "number of trials");
  verify->add_option("--seed", config.seed, "random seed");
  verify->add_option("--delta", config.delta, "boundary data offset");
  verify->add_option("--nx", config.nx, "x intervals per ray");
  verify->add_option("--nl", config.nl, "local-time intervals");
  verify->add_option("--tol", config.tol, "solver tolerance");
  add_common(verify);

  std::string eps_text;
  auto* stat = app.add_subcommand("solve-static", "l-independent mode via the embedding");
  stat->add_option("--problem", config.problem_path, "problem file")->required();
  stat->add_option("--eps", eps_text, "decreasing schedule, e.g. 0.2,0.1,0.05")->required();
  stat->add_option("--nx", config.nx, "x intervals per ray");
  stat->add_option("--nl", config.nl, "local-time intervals");
  stat->add_option("--tol", config.tol, "solver tolerance");
  stat->add_option("--out", config.out_path, "slice output (csv)");
  add_common(stat);

  auto* testfn = app.add_subcommand("testfn", "vertex-collar test functions");
  auto* tf_solve = testfn->add_subcommand("solve", "solve one collar problem");
  tf_solve->add_option("--spec", config.spec_path, "collar spec file")->required();
  tf_solve->add_option("--out", config.out_path, "sampled output (csv)");
  auto* tf_study = testfn->add_subcommand("study", "vanishing-limit schedule");
  tf_study->add_option("--schedule", config.schedule_path, "schedule file")->required();
  testfn->require_subcommand(1);

  double oracle_lambda = 1.0, oracle_sigma = 1.0, oracle_length = 1.0, oracle_right = 1.0;
  std::string oracle_at = "0";
  auto* oracle = app.add_subcommand("oracle", "closed-form Neumann model solution");
  oracle->add_option("--lambda", oracle_lambda, "discount");
  oracle->add_option("--sigma", oracle_sigma, "diffusion coefficient");
  oracle->add_option("--R", oracle_length, "domain length");
  oracle->add_option("--z", oracle_right, "right boundary value");
  oracle->add_option("--at", oracle_at, "evaluation points, comma separated");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo spider paths");
  simulate->add_option("--problem", config.problem_path, "problem file (singleton controls)");
  simulate->add_option("--paths", config.paths, "number of paths");
  simulate->add_option("--dt", config.dt, "time step");
  simulate->add_option("--T", config.horizon, "horizon");
  simulate->add_option("--seed", config.seed, "random seed");
  simulate->add_option("--report", config.report_path, "JSON report path");
  auto* identity = simulate->add_subcommand("identity-checks", "local-time identity suite");
  identity->add_option("--schedule", config.schedule_path, "schedule file")->required();
  identity->add_option("--report", config.report_path, "JSON report path");
  add_common(simulate);

  CLI11_PARSE(app, argc, argv);

  try {
    config.validate();
    if (validate->parsed()) return run_validate(config);
    if (solve->parsed()) return run_solve(config, slice_text, slice_out, second_order_flux);
    if (verify->parsed()) return run_verify_comparison(config);
    if (stat->parsed()) {
      config.eps_schedule = spider::parse_double_list(eps_text);
      config.validate();
      return run_solve_static(config);
    }
    if (testfn->parsed()) {
      if (tf_solve->parsed()) return run_testfn_solve(config);
      return run_testfn_study(config);
    }
    if (oracle->parsed()) {
      return run_oracle(oracle_lambda, oracle_sigma, oracle_length, oracle_right, oracle_at);
    }
    if (simulate->parsed()) {
      if (identity->parsed()) return run_identity_checks(config);
      if (config.problem_path.empty()) {
        throw std::invalid_argument("simulate requires --problem (or identity-checks)");
      }
      return run_simulate(config);
    }
  } catch (const spider::VerificationError& e) {
    std::fprintf(stderr, "verification failed: %s\n", e.what());
    return kExitVerificationFailed;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
