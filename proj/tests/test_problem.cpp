#include <doctest.h>

#include <cmath>

#include "spider/problem.hpp"

using namespace spider;

namespace {

// Two-ray problem with constant data; the basis for most solver tests.
ProblemData constant_problem(double c = 1.0, double lambda = 1.0) {
  ProblemData data;
  data.network = Network{2, 1.0, 1.0};
  data.discount = lambda;
  for (int i = 0; i < 2; ++i) {
    data.sigma.push_back(CoefficientExpr::constant(1.0));
    data.drift.push_back(CoefficientExpr::constant(0.0));
    data.run_cost.push_back(CoefficientExpr::constant(-lambda * c));
    data.spin.push_back(CoefficientExpr::constant(0.5));
    data.lateral.push_back(CoefficientExpr::constant(c));
    data.terminal.push_back(CoefficientExpr::constant(c));
    data.ray_controls.push_back(ControlSet::singleton({0.0}));
  }
  data.junction_cost = CoefficientExpr::constant(0.0);
  data.vertex_control = ControlSet::singleton({0.0, 0.0});
  return data;
}

}  // namespace

TEST_SUITE_BEGIN("problem");

TEST_CASE("assumption validation on constant data") {
  ProblemData data = constant_problem();
  auto report = validate_assumptions(data, 11, 0.0);
  CHECK(report.sigma_lower == doctest::Approx(1.0));
  CHECK(report.zeta_lower == doctest::Approx(0.5));
  CHECK(report.pass_spin);
  CHECK(report.pass_ellipticity);
  CHECK(report.pass_regularity());
  CHECK(report.all_pass());
}

TEST_CASE("vanishing viscosity at the vertex fails ellipticity") {
  ProblemData data = constant_problem();
  data.sigma[0] = CoefficientExpr::parse("x");
  auto report = validate_assumptions(data, 11, 0.0);
  CHECK(report.sigma_lower == doctest::Approx(0.0));
  CHECK_FALSE(report.pass_ellipticity);
}

TEST_CASE("a pole in one coefficient trips only its regularity clause") {
  ProblemData data = constant_problem();
  data.sigma[0] = CoefficientExpr::parse("1/(x - 0.5)");  // pole at a sample point
  auto report = validate_assumptions(data, 11, 0.0);
  CHECK_FALSE(report.pass_reg_sigma);
  CHECK(report.pass_reg_drift);
  CHECK(report.pass_reg_cost);
  CHECK(report.pass_reg_spin);
  CHECK(report.pass_reg_junction);
  CHECK_FALSE(report.all_pass());
}

TEST_CASE("Lipschitz estimate approaches the analytic derivative bound") {
  ProblemData data = constant_problem();
  data.drift[0] = CoefficientExpr::parse("sin(5*x)");
  auto report = validate_assumptions(data, 100, 0.0);
  const auto& b = report.drift_bounds[0];
  CHECK(b.sup_abs <= 1.0 + 1e-12);
  CHECK(b.sup_abs > 0.9);
  CHECK(b.lip_x > 4.5);  // within 10% of the true bound 5
  CHECK(b.lip_x < 5.0 + 1e-9);
}

TEST_CASE("hamiltonian with singleton control") {
  ProblemData data = constant_problem();
  data.run_cost[0] = CoefficientExpr::constant(0.0);
  // lambda=1, sigma=1, b=0, h=0 at (u, p, S) = (2, 5, 3): 2 - 3 = -1.
  CHECK(hamiltonian_eval(data, 0, 0.3, 0.2, 2.0, 5.0, 3.0) == doctest::Approx(-1.0));
}

TEST_CASE("hamiltonian brute-forces the control set") {
  ProblemData data = constant_problem();
  data.drift[0] = CoefficientExpr::parse("beta");
  data.run_cost[0] = CoefficientExpr::constant(0.0);
  data.ray_controls[0] = ControlSet::list({{-1.0}, {1.0}});
  CHECK(hamiltonian_eval(data, 0, 0.0, 0.0, 0.0, 2.0, 0.0) == doctest::Approx(2.0));

  data.drift[0] = CoefficientExpr::constant(0.0);
  data.run_cost[0] = CoefficientExpr::parse("beta*beta");
  data.ray_controls[0] = ControlSet::list({{-1.0}, {0.0}, {1.0}});
  CHECK(hamiltonian_eval(data, 0, 0.0, 0.0, 0.0, 0.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("hamiltonian properties: monotone in curvature, affine in value") {
  ProblemData data = constant_problem();
  data.drift[0] = CoefficientExpr::parse("beta*(1 + x)");
  data.run_cost[0] = CoefficientExpr::parse("beta + cos(x)");
  data.ray_controls[0] = ControlSet::list({{-1.0}, {-0.5}, {0.5}, {1.0}});
  const double x = 0.4, l = 0.6, p = 1.7;
  double prev = hamiltonian_eval(data, 0, x, l, 0.0, p, -2.0);
  for (double curv : {-1.0, 0.0, 1.0, 2.0}) {
    const double val = hamiltonian_eval(data, 0, x, l, 0.0, p, curv);
    CHECK(val <= prev + 1e-12);
    prev = val;
  }
  const double base = hamiltonian_eval(data, 0, x, l, 0.3, p, 1.0);
  for (double c : {-2.0, 0.5, 4.0}) {
    CHECK(hamiltonian_eval(data, 0, x, l, 0.3 + c, p, 1.0) ==
          doctest::Approx(base + data.discount * c));
  }
}

TEST_CASE("speed of the ray operator") {
  ProblemData data = constant_problem();
  data.sigma[0] = CoefficientExpr::constant(2.0);
  data.drift[0] = CoefficientExpr::constant(1.0);
  data.run_cost[0] = CoefficientExpr::constant(0.0);
  CHECK(speed_eval(data, 0, 0.1, 0.1, 4.0) == doctest::Approx(2.0));

  data.sigma[0] = CoefficientExpr::constant(1.0);
  data.drift[0] = CoefficientExpr::parse("beta");
  data.ray_controls[0] = ControlSet::list({{-1.0}, {1.0}});
  CHECK(speed_eval(data, 0, 0.1, 0.1, 3.0) == doctest::Approx(3.0));
  CHECK(speed_eval(data, 0, 0.1, 0.1, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("speed scales positively in (b, h)") {
  ProblemData data = constant_problem();
  data.drift[0] = CoefficientExpr::parse("beta - 0.3");
  data.run_cost[0] = CoefficientExpr::parse("0.2 + beta*beta");
  data.ray_controls[0] = ControlSet::list({{-1.0}, {0.0}, {1.0}});
  const double base = speed_eval(data, 0, 0.2, 0.5, 1.3);
  ProblemData scaled = data;
  const double c = 2.5;
  scaled.drift[0] = CoefficientExpr::parse("2.5*(beta - 0.3)");
  scaled.run_cost[0] = CoefficientExpr::parse("2.5*(0.2 + beta*beta)");
  CHECK(speed_eval(scaled, 0, 0.2, 0.5, 1.3) == doctest::Approx(c * base));
}

TEST_CASE("kirchhoff flux with singleton and competing controls") {
  ProblemData data = constant_problem();
  const double p1[] = {2.0, -4.0};
  CHECK(kirchhoff_flux(data, 0.0, p1).value == doctest::Approx(-1.0));

  data.spin[0] = CoefficientExpr::parse("theta1");
  data.spin[1] = CoefficientExpr::parse("theta2");
  data.vertex_control = ControlSet::list({{0.9, 0.1}, {0.1, 0.9}});
  const double p2[] = {1.0, -1.0};
  auto r = kirchhoff_flux(data, 0.0, p2);
  CHECK(r.value == doctest::Approx(-0.8));
  CHECK(r.control_index == 1);

  data.junction_cost = CoefficientExpr::parse("abs(theta1 - 0.5)");
  const double p0[] = {0.0, 0.0};
  CHECK(kirchhoff_flux(data, 0.0, p0).value == doctest::Approx(0.4));
}

TEST_CASE("kirchhoff flux minimum matches brute force re-evaluation") {
  ProblemData data = constant_problem();
  data.spin[0] = CoefficientExpr::parse("theta1/(theta1 + theta2)");
  data.spin[1] = CoefficientExpr::parse("theta2/(theta1 + theta2)");
  data.junction_cost = CoefficientExpr::parse("0.1*theta1*l");
  data.vertex_control = ControlSet::uniform_box({0.2, 0.2}, {1.0, 1.0}, 4);
  const double p[] = {0.7, -0.9};
  auto r = kirchhoff_flux(data, 0.5, p);
  double brute = 1e300;
  std::size_t brute_idx = 0;
  for (std::size_t m = 0; m < data.vertex_control.points.size(); ++m) {
    EvalContext ctx;
    ctx.l = 0.5;
    ctx.theta = data.vertex_control.points[m];
    double v = data.junction_cost.eval(ctx) + data.spin[0].eval(ctx) * p[0] +
               data.spin[1].eval(ctx) * p[1];
    if (v < brute) {
      brute = v;
      brute_idx = m;
    }
  }
  CHECK(r.value == brute);  // bit-exact
  CHECK(r.control_index == brute_idx);
}

TEST_CASE("kirchhoff speed") {
  ProblemData data = constant_problem();
  for (int i = 0; i < 2; ++i) {
    data.sigma[i] = CoefficientExpr::constant(1.0);
    data.drift[i] = CoefficientExpr::constant(1.0);
    data.run_cost[i] = CoefficientExpr::constant(0.0);
  }
  CHECK(kirchhoff_speed_eval(data, 0.0, 0.0, 2.0) == doctest::Approx(2.0));

  // Two rays with speeds (3, -1) and selector weights.
  data.drift[0] = CoefficientExpr::constant(3.0);
  data.drift[1] = CoefficientExpr::constant(-1.0);
  data.spin[0] = CoefficientExpr::parse("theta1");
  data.spin[1] = CoefficientExpr::parse("theta2");
  data.vertex_control = ControlSet::list({{1.0, 0.0}, {0.0, 1.0}});
  CHECK(kirchhoff_speed_eval(data, 0.0, 0.0, 1.0) == doctest::Approx(-1.0));
  CHECK(kirchhoff_speed_eval(data, 0.0, 0.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("problem file round trip") {
  const std::string text = R"(
# sample problem
[network]
rays = 2
length = 1.0
local_time_bound = 1.0
lambda = 1.0

[coefficients.ray.1]
sigma = 1
b = beta
h = -1

[coefficients.ray.2]
sigma = 1 + 0.1*x
b = 0
h = -1

[coefficients.vertex]
spin_1 = 0.5
spin_2 = 0.5
h0 = 0.1*l

[controls]
ray_1 = list: -1; 1
ray_2 = uniform: -1, 1, 3
vertex = list: (0, 0)

[boundary]
chi_1 = 1
chi_2 = 1 - 0.2*l
terminal_1 = 1
terminal_2 = 1 - 0.2 + 0.2*x
)";
  ProblemData data = parse_problem_text(text, "<test>");
  CHECK(data.network.ray_count == 2);
  CHECK(data.discount == 1.0);
  CHECK(data.ray_controls[0].size() == 2);
  CHECK(data.ray_controls[1].size() == 3);
  CHECK(data.ray_controls[1].points[1][0] == doctest::Approx(0.0));
  CHECK(data.vertex_control.dimension() == 2);
  EvalContext ctx;
  ctx.x = 0.5;
  CHECK(data.sigma[1].eval(ctx) == doctest::Approx(1.05));
}

TEST_CASE("problem file errors are precise") {
  CHECK_THROWS_WITH_AS(parse_problem_text("[network]\nrays = 2\n", "<t>"),
                       doctest::Contains("missing key 'length'"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_problem_text("rays = 2\n", "<t>"),
                       doctest::Contains("outside of any section"), std::runtime_error);
  const std::string bad_expr = R"(
[network]
rays = 2
length = 1.0
local_time_bound = 1.0
lambda = 1.0
[coefficients.ray.1]
sigma = x +* 2
b = 0
h = 0
)";
  CHECK_THROWS_WITH_AS(parse_problem_text(bad_expr, "<t>"), doctest::Contains("offset 3"),
                       std::runtime_error);
}

TEST_CASE("structural validation rejects misplaced variables") {
  ProblemData data = constant_problem();
  data.lateral[0] = CoefficientExpr::parse("x");
  CHECK_THROWS_AS(data.validate_structure(), std::invalid_argument);

  data = constant_problem();
  data.terminal[1] = CoefficientExpr::parse("l");
  CHECK_THROWS_AS(data.validate_structure(), std::invalid_argument);

  data = constant_problem();
  data.spin[0] = CoefficientExpr::parse("theta3");
  CHECK_THROWS_AS(data.validate_structure(), std::invalid_argument);

  data = constant_problem();
  data.discount = 0.0;
  CHECK_THROWS_AS(data.validate_structure(), std::invalid_argument);
}

TEST_SUITE_END();
