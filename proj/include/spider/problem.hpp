#pragma once

#include <string>
#include <vector>

#include "spider/expr.hpp"
#include "spider/network.hpp"

namespace spider {

// Finite realization of a compact control set: an explicit point list, either
// user supplied or a uniform sample of an interval/box. Points have dimension
// 1 for ray controls and ray_count for the vertex control.
struct ControlSet {
  std::vector<std::vector<double>> points;

  static ControlSet singleton(std::vector<double> point);
  static ControlSet list(std::vector<std::vector<double>> pts);
  static ControlSet uniform_interval(double lo, double hi, int count);
  static ControlSet uniform_box(const std::vector<double>& lo,
                                const std::vector<double>& hi, int count_per_axis);

  std::size_t size() const { return points.size(); }
  int dimension() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  void validate(int expected_dim) const;
};

// Full problem data: geometry, discount, per-ray coefficients
// sigma/b/h(x, l, beta), vertex spin weights and junction cost in (l, theta),
// lateral data chi_i(l), terminal data terminal_i(x), and the control sets.
struct ProblemData {
  Network network;
  double discount = 1.0;  // lambda > 0

  std::vector<CoefficientExpr> sigma;     // per ray, vars x, l, beta
  std::vector<CoefficientExpr> drift;     // b_i
  std::vector<CoefficientExpr> run_cost;  // h_i
  std::vector<CoefficientExpr> spin;      // S_i, vars l, theta*
  CoefficientExpr junction_cost;          // h_0, vars l, theta*
  std::vector<CoefficientExpr> lateral;   // chi_i, var l
  std::vector<CoefficientExpr> terminal;  // T_i, var x

  std::vector<ControlSet> ray_controls;  // B_i
  ControlSet vertex_control;             // O

  // Structural checks: sizes, control dimensions, permitted variables.
  void validate_structure() const;
};

struct CoefficientBounds {
  double sup_abs = 0.0;
  double lip_x = 0.0;  // difference-quotient estimate
  double lip_l = 0.0;
};

// Sampling-based estimate of the data assumptions: positive spin weights,
// uniform ellipticity, and bounded/Lipschitz coefficients.
struct AssumptionReport {
  double zeta_lower = 0.0, zeta_upper = 0.0;  // spin weight range
  double sigma_lower = 0.0, sigma_upper = 0.0;
  double drift_bound = 0.0;     // sup|b| + Lip_x + Lip_l, worst ray
  double cost_bound = 0.0;      // same for h_i and h_0
  std::vector<CoefficientBounds> sigma_bounds, drift_bounds, cost_bounds, spin_bounds;
  CoefficientBounds junction_cost_bounds;

  bool pass_spin = false;         // (S): zeta_lower > tol
  bool pass_ellipticity = false;  // (E): sigma_lower > tol
  // Regularity, one flag per coefficient family: drift, sigma, ray cost,
  // spin weights, junction cost. A family passes when every sampled value
  // and difference quotient is finite.
  bool pass_reg_drift = false, pass_reg_sigma = false, pass_reg_cost = false;
  bool pass_reg_spin = false, pass_reg_junction = false;
  int samples_per_axis = 0;

  bool pass_regularity() const {
    return pass_reg_drift && pass_reg_sigma && pass_reg_cost && pass_reg_spin &&
           pass_reg_junction;
  }
  bool all_pass() const { return pass_spin && pass_ellipticity && pass_regularity(); }
};

AssumptionReport validate_assumptions(const ProblemData& data, int samples_per_axis,
                                      double tol);

// lambda*u + max over ray controls of (-sigma*curvature + b*gradient + h).
double hamiltonian_eval(const ProblemData& data, int ray, double x, double l,
                        double u, double gradient, double curvature);

// max over ray controls of (b*gradient + h) / sigma. Throws if sigma <= 0.
double speed_eval(const ProblemData& data, int ray, double x, double l,
                  double gradient);

struct KirchhoffResult {
  double value = 0.0;
  std::size_t control_index = 0;  // first minimizer in declared order
};

// min over vertex controls of sum_i spin_i(l, theta) * gradient_i + h0(l, theta).
KirchhoffResult kirchhoff_flux(const ProblemData& data, double l,
                               std::span<const double> gradients);

// min over vertex controls of sum_i spin_i(l, theta) * speed_eval(ray i).
// The same scalar gradient feeds every ray.
double kirchhoff_speed_eval(const ProblemData& data, double x, double l,
                            double gradient);

// Problem files: key/value sections [network], [coefficients.ray.N],
// [coefficients.vertex], [controls], [boundary]. Grammar in docs/formats.md.
ProblemData load_problem(const std::string& path);
ProblemData parse_problem_text(const std::string& text, const std::string& origin);

}  // namespace spider
