#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spider/network.hpp"
#include "spider/problem.hpp"

namespace spider {

// A computed result failed a stated check (as opposed to bad input or an
// internal failure); the CLI maps this to exit code 2.
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_policy_iters = 200;
  bool upwind = true;  // false: central first differences (verification fault injection)
  bool second_order_flux = false;
  double compat_tol = 1e-9;  // terminal/lateral corner compatibility
  int threads = 0;
};

struct RayBvpResult {
  std::vector<double> values;  // nx + 1 nodes, endpoints pinned
  double flux = 0.0;           // one-sided gradient at the vertex
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;  // one entry per policy iteration
  std::vector<int> policy;  // control index per interior node
};

// Discounted HJB two-point problem on one ray at a frozen local-time level,
// by Howard policy iteration on a monotone upwind scheme.
RayBvpResult solve_ray_bvp(const ProblemData& data, int ray, double l,
                           double vertex_value, double right_value, const Grid& grid,
                           const SolverOptions& options = {},
                           const std::vector<int>* warm_policy = nullptr);

// Discrete ray operator evaluated on a stored field at one interior node.
double discrete_residual(const ProblemData& data, const Grid& grid,
                         const NetworkFunction& f, int ray, int xi, int li,
                         const SolverOptions& options = {});

struct SolveReport {
  NetworkFunction solution;
  std::vector<int> policy_iters_per_level;  // max over rays
  double max_interior_residual = 0.0;       // over solved levels (l < K)
  double max_kirchhoff_residual = 0.0;      // backward-difference defect, stored field
  double dl = 0.0;
  double flux_sensitivity = 0.0;  // measured vertex flux response
  int total_substeps = 0;
  double seconds = 0.0;
};

// Marches the local-time junction condition from the terminal level down to
// l = 0, solving all ray problems at each level.
SolveReport march_local_time(const ProblemData& data, const Grid& grid,
                             const SolverOptions& options = {});

struct ShiftResult {
  NetworkFunction shifted;
  double min_interior_residual = 0.0;  // of the shifted field, solved levels
};

// f + c; when f solves the scheme the shifted field has interior residual
// >= discount * c up to the solver tolerance.
ShiftResult shift_supersolution(const ProblemData& data, const Grid& grid,
                                const NetworkFunction& f, double c,
                                const SolverOptions& options = {});

// f_i(x, l) + sign * eps * exp(-eps * l), level by level.
NetworkFunction epsilon_scaling_transform(const NetworkFunction& f, double eps,
                                          int sign);

struct ComparisonTrial {
  double delta = 0.0;
  double shift = 0.0;
  bool ordering_holds = false;
  double min_gap = 0.0;  // min over nodes of (raised - lowered)
  GridLocation worst_location;
  double shift_residual_defect = 0.0;  // max(0, discount*shift - min residual)
  double penalty_argmax_l = 0.0;       // unbounded mode: argmax of sub-super-alpha*l^2
};

struct ComparisonReport {
  std::vector<ComparisonTrial> trials;
  int failures = 0;
  bool all_ordered() const { return failures == 0; }
};

// Solves the problem with raised and lowered boundary data and checks that
// the discrete solutions stay ordered at every node; also exercises the
// value-shift residual property. Trial 0 uses delta exactly; later trials
// draw delta and the shift from the seeded stream.
ComparisonReport verify_comparison(const ProblemData& data, const Grid& grid,
                                   int trials, std::uint64_t seed,
                                   const SolverOptions& options = {},
                                   double delta = 0.1, double ordering_tol = 1e-9);

struct StaticSolveResult {
  std::vector<std::vector<double>> slice;  // [ray][x node], extracted l = 0 profile
  std::vector<double> eps_used;
  std::vector<std::vector<std::vector<double>>> eps_slices;  // per schedule entry
  std::vector<double> cauchy_gaps;  // sup gaps between consecutive eps slices
  double l_variation = 0.0;         // bottom-window variation of the limit run
  double extrapolation_gap = 0.0;   // Richardson-vs-limit diagnostic
};

// Solves the l-independent problem by embedding it into the local-time
// system: each schedule entry wraps the boundary data with the
// eps*exp(-eps*l) profile and marches over the truncation window; the
// extracted slice comes from the plain (eps -> 0) member of the family.
// Throws if the extracted slice fails to be l-invariant within tolerance.
StaticSolveResult solve_l_independent(const ProblemData& data, const Grid& grid,
                                      const std::vector<double>& eps_schedule,
                                      const SolverOptions& options = {},
                                      double l_variation_tol = 1e-6);

}  // namespace spider
