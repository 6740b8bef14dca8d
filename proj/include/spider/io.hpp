#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spider/network.hpp"

namespace spider {

// Solution files. CSV rows are `ray,x,l,u` sorted by (ray, l, x) with
// 17-significant-digit decimals; JSON documents follow
// docs/solution.schema.json. Both round-trip losslessly.
void write_solution_csv(const NetworkFunction& f, const std::string& path);
void write_solution_json(const NetworkFunction& f, const std::string& path);
// Dispatch on the .csv / .json extension.
void write_solution(const NetworkFunction& f, const std::string& path);

NetworkFunction load_solution_csv(const std::string& path);
NetworkFunction load_solution_json(const std::string& path);
NetworkFunction load_solution(const std::string& path);

enum class SliceKind { kVertexLine, kFixedL, kFixedX };

struct SliceSpec {
  SliceKind kind = SliceKind::kVertexLine;
  int ray = 0;         // ignored for the vertex line
  double value = 0.0;  // the fixed l (or x); snapped to the nearest node
};

// Two-column table for external plotting.
void export_plot_data(const NetworkFunction& f, const SliceSpec& slice,
                      const std::string& path);

// Effective settings of one CLI invocation. Flags override values read from a
// config file; defaults fill the rest.
struct RunConfig {
  std::string command;
  std::string problem_path;
  std::string out_path;
  std::string report_path;
  std::string spec_path;      // testfn
  std::string schedule_path;  // testfn study / simulate identity-checks
  int nx = 200;
  int nl = 200;
  double tol = 1e-8;
  int samples = 64;  // assumption validation
  int trials = 20;
  double delta = 0.1;
  std::uint64_t seed = 1;
  int paths = 10000;
  double dt = 1e-4;
  double horizon = 1.0;
  std::vector<double> eps_schedule;
  int threads = 0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Key = value lines, one per field; parse_run_config_file . write_run_config
// is the identity on validated configs.
RunConfig parse_run_config_file(const std::string& path, RunConfig base = {});
void write_run_config(const RunConfig& config, const std::string& path);

std::vector<double> parse_double_list(const std::string& text);

}  // namespace spider
