#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace spider {

// Position update when the proposed step lands below the vertex.
//  kMirror: reflect to |x*| and record twice the overshoot as local time
//           (the doubling makes the accumulated amount converge to the
//           occupation-density local time).
//  kBridge: sample the exact Brownian-bridge minimum of the step and apply
//           the one-sided correction; first-order weak accuracy.
enum class ReflectionScheme { kMirror, kBridge };

// Frozen-control spider dynamics. `diffusion` is the generator coefficient:
// the process generator on each ray is a d^2/dx^2 + b d/dx, so the SDE
// volatility is sqrt(2 a). Spin weights must sum to 1 over rays for every l.
struct SpiderDynamics {
  int ray_count = 1;
  std::function<double(int ray, double x, double l)> diffusion;
  std::function<double(int ray, double x, double l)> drift;
  std::function<double(int ray, double l)> spin;
};

SpiderDynamics reflected_brownian_motion(int rays = 1);

struct SimParams {
  double horizon = 1.0;
  double dt = 1e-4;
  std::uint64_t seed = 1;
  double x0 = 0.0;
  int ray0 = 0;
  double l0 = 0.0;
  ReflectionScheme scheme = ReflectionScheme::kMirror;
  int threads = 0;  // for ensemble estimators
};

struct SpiderPath {
  double dt = 0.0;
  std::vector<double> t, x, local_time;
  std::vector<int> ray;
  std::vector<std::uint8_t> reflected;  // step n -> n+1 hit the vertex
};

// One trajectory, fully recorded. Deterministic in (params.seed).
SpiderPath simulate_path(const SpiderDynamics& dynamics, const SimParams& params);

// eps times the number of completed passages from the vertex up to eps and
// back (any ray). Converges to the path's local time as eps -> 0.
double downcrossing_local_time(const SpiderPath& path, double eps);

struct EstimatorReport {
  double estimate = 0.0;
  double std_error = 0.0;
  int paths = 0;
};

// Mean absolute gap between the down-crossing count estimator and the
// accumulated local time at the horizon.
EstimatorReport downcrossing_deviation(const SpiderDynamics& dynamics,
                                       const SimParams& params, int paths, double eps);

// Mean accumulated local time at the horizon.
EstimatorReport local_time_at_horizon(const SpiderDynamics& dynamics,
                                      const SimParams& params, int paths);

// Mean absolute gap between the band occupation functional
// (1/2 eps) int_0^t 1_{0 <= x <= eps} ds and (sum_i alpha_i / sigma_i(0)^2) l(t),
// with sigma^2 = 2 * diffusion and alpha the spin weights at the start state.
EstimatorReport occupation_identity_check(const SpiderDynamics& dynamics,
                                          const SimParams& params, int paths,
                                          double eps, double t);

// Mean fraction of time spent below `delta`.
EstimatorReport non_stickiness_check(const SpiderDynamics& dynamics,
                                     const SimParams& params, int paths, double delta);

// Empirical ray-selection frequencies at reflection events.
std::vector<double> spin_frequencies(const SpiderDynamics& dynamics,
                                     const SimParams& params, int paths,
                                     std::uint64_t* events_out = nullptr);

// Discounted cost functional along the path:
//   int e^{-lambda u} running_cost du + int e^{-lambda u} junction_cost dl(u),
// truncated when the discount weight drops below `tail`. With exits enabled
// the path stops at x = x_exit or l = l_exit and collects the boundary payoff.
struct ValueProblem {
  double discount = 1.0;
  std::function<double(int ray, double x, double l)> running_cost;
  std::function<double(double l)> junction_cost;
  double tail = 1e-6;

  bool exit_enabled = false;
  double x_exit = std::numeric_limits<double>::infinity();
  double l_exit = std::numeric_limits<double>::infinity();
  std::function<double(int ray, double l)> x_exit_payoff;    // chi_i(l)
  std::function<double(int ray, double x)> l_exit_payoff;    // T_i(x)
};

EstimatorReport estimate_value(const SpiderDynamics& dynamics, const SimParams& params,
                               int paths, const ValueProblem& problem);

// Time fraction spent on each ray over the horizon.
std::vector<double> ray_occupation(const SpiderDynamics& dynamics,
                                   const SimParams& params, int paths);

}  // namespace spider
