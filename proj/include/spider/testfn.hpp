#pragma once

#include <span>
#include <vector>

namespace spider {

// Closed-form solution of  lambda*u - sigma*u'' = 0 on (0, R) with u'(0) = 0
// and u(R) = z:  u(x) = z cosh(k x)/cosh(k R), k = sqrt(lambda/sigma).
struct LinearOracle {
  double discount = 1.0;   // lambda
  double sigma = 1.0;
  double length = 1.0;     // R
  double right_value = 1.0;  // z

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  std::vector<double> sample(int intervals) const;  // values on a uniform grid
};

// Parameters of the vertex-collar two-point problem
//   reaction*psi - psi'' + grad_coef*|psi'| + forcing + eta = 0 on (0, width),
// per ray, with boundary values
//   psi(0, l)     = vertex_value + vertex_slope*(l - center_l),
//   psi(width, l) = far_values[i] + vertex_slope*(l - center_l) + gamma,
// for l in [center_l - l_halfwidth, center_l + l_halfwidth].
struct TestFunctionSpec {
  double reaction = 1.0;    // > 0
  double grad_coef = 0.0;   // coefficient of |psi'|
  double forcing = 0.0;
  double width = 0.1;       // > 0
  double l_halfwidth = 0.0; // >= 0
  double eta = 0.0;
  double gamma = 0.0;
  double vertex_slope = 0.0;  // >= 0, the l-derivative at the vertex
  double vertex_value = 0.0;
  std::vector<double> far_values;  // one per ray
  double absorb_scale = 1.0;  // > 0, scales the absorption requirement
  double center_l = 0.5;

  int ray_count() const { return static_cast<int>(far_values.size()); }
};

// 1 - |B| w e^{|B| w} > 0 for B = grad_coef, w = width.
bool smallness_ok(double grad_coef, double width);

// Second smallness condition tying the l window to the absorption scale.
bool kappa_ok(double absorb_scale, double width, double l_halfwidth, double reaction,
              double grad_coef);

// Sup bound for the solved collar function:
//   |w| + max|z_i| + l_halfwidth*vertex_slope + |gamma| + (|forcing|+|eta|)/reaction.
double sup_bound_M(const TestFunctionSpec& spec);

// Closed-form slope parameter making the vertex l-derivative absorb the
// collar errors; requires kappa_ok.
double compute_S_beta(const TestFunctionSpec& spec);

// Solved collar function sampled on a fine x-grid for each l sample.
struct TestFunction {
  TestFunctionSpec spec;
  std::vector<double> x_nodes;  // uniform on [0, width]
  std::vector<double> l_nodes;  // uniform on the l window
  // Layout [ray][l][x].
  std::vector<double> values, d1, d2;

  double at(int ray, int li, int xi) const;
  double slope_at(int ray, int li, int xi) const;
  double curvature_at(int ray, int li, int xi) const;
  double max_abs_slope() const;
  double max_residual() const;  // of the collar equation, over all samples
  // max_i sup_l of |flux identity defect|, quadrature based:
  //   gamma + z_i - w = width*psi'(0) + iint (r psi + B|psi'| + H + eta).
  double flux_identity_defect() const;
  // (2/width^2) iint psi_i(z, l) dz du for one (ray, l).
  double averaged_double_integral(int ray, int li) const;
};

TestFunction solve_param_ode(const TestFunctionSpec& spec, int nx_fine = 2048,
                             int nl_samples = 8);

// vertex l-derivative >= absorb_scale*width*(|B| |psi'|_sup + |H| + |eta|).
bool absorption_check(const TestFunction& tf, const TestFunctionSpec& spec);

struct VanishingRow {
  double width;        // descending across rows
  double l_halfwidth;
  double eta;
  double gamma;
  std::vector<double> far_values;
  // Outputs:
  double slope_used = 0.0;
  double deviation = 0.0;  // max_i sup_l |(2/w^2) iint psi - vertex_value|
};

// Runs the schedule (each row solved with compute_S_beta) and fills outputs.
// Rows must decrease strictly in every column that moves.
std::vector<VanishingRow> vanishing_limit_study(TestFunctionSpec base,
                                                std::vector<VanishingRow> schedule,
                                                int nx_fine = 2048);

enum class Section3Side { kSuper, kSub };

// Double-integral test function for the scalar Neumann model problem:
// side kSuper:  phi'' = eta + lambda f / sigma,  phi(0)=0,
//               phi(eps) = f(eps) - f(0) - gamma,
// side kSub:    phi'' = -eta + lambda g / sigma, phi(0)=0,
//               phi(eps) = g(eps) - g(0) + gamma.
// The returned inequality is lhs >= rhs (super) or lhs <= rhs (sub) with
// lhs = iint phi'' and rhs = phi(eps); it holds exactly when the one-sided
// vertex slope has the sign forced by the super/sub property.
struct Section3Result {
  std::vector<double> phi;
  double vertex_slope = 0.0;  // phi'(0)
  double lhs = 0.0;
  double rhs = 0.0;
  bool inequality_holds = false;
};

Section3Result section3_test_function(std::span<const double> f_samples,
                                      std::span<const double> sigma_samples,
                                      double discount, double eps, double eta,
                                      double gamma, Section3Side side);

// (2/eps^2) iint lambda (g - f)/sigma, the quantity whose eps->0 limit is
// lambda (g(0) - f(0)) / sigma(0).
double section3_limit_quantity(std::span<const double> f_samples,
                               std::span<const double> g_samples,
                               std::span<const double> sigma_samples,
                               double discount, double eps);

}  // namespace spider
