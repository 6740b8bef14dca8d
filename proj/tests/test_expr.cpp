#include <doctest.h>

#include <cmath>

#include "spider/expr.hpp"

using namespace spider;

TEST_SUITE_BEGIN("expr");

TEST_CASE("constants and arithmetic") {
  CHECK(CoefficientExpr::parse("1").eval({}) == 1.0);
  CHECK(CoefficientExpr::parse("2 + 3*4").eval({}) == 14.0);
  CHECK(CoefficientExpr::parse("(2 + 3)*4").eval({}) == 20.0);
  CHECK(CoefficientExpr::parse("-2^2").eval({}) == -4.0);  // unary binds the power
  CHECK(CoefficientExpr::parse("2^-1").eval({}) == 0.5);
  CHECK(CoefficientExpr::parse("7/2").eval({}) == 3.5);
  CHECK(CoefficientExpr::parse("1 - 2 - 3").eval({}) == -4.0);  // left associative
}

TEST_CASE("variables") {
  EvalContext ctx;
  ctx.x = 2.0;
  ctx.beta = 3.0;
  ctx.l = 0.0;
  CHECK(CoefficientExpr::parse("x*beta + exp(-l)").eval(ctx) == doctest::Approx(7.0));

  const double theta[] = {0.25, 0.75};
  ctx.theta = theta;
  CHECK(CoefficientExpr::parse("theta1 + 2*theta2").eval(ctx) == doctest::Approx(1.75));
}

TEST_CASE("functions") {
  CHECK(CoefficientExpr::parse("min(2, -1)").eval({}) == -1.0);
  CHECK(CoefficientExpr::parse("max(2, -1)").eval({}) == 2.0);
  CHECK(CoefficientExpr::parse("abs(-3.5)").eval({}) == 3.5);
  CHECK(CoefficientExpr::parse("sin(0)").eval({}) == 0.0);
  CHECK(CoefficientExpr::parse("cos(0)").eval({}) == 1.0);
  CHECK(CoefficientExpr::parse("pow(2, 10)").eval({}) == 1024.0);
  CHECK(CoefficientExpr::parse("exp(1)").eval({}) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    CoefficientExpr::parse("x +* 2");
    FAIL("expected ExprError");
  } catch (const ExprError& e) {
    CHECK(e.offset == 3);
  }
  CHECK_THROWS_AS(CoefficientExpr::parse("(1 + 2"), ExprError);
  CHECK_THROWS_AS(CoefficientExpr::parse("min(1)"), ExprError);
  CHECK_THROWS_AS(CoefficientExpr::parse("1 2"), ExprError);
  CHECK_THROWS_AS(CoefficientExpr::parse(""), ExprError);
}

TEST_CASE("unknown identifiers are rejected") {
  CHECK_THROWS_AS(CoefficientExpr::parse("y + 1"), ExprError);
  CHECK_THROWS_AS(CoefficientExpr::parse("theta"), ExprError);
  CHECK_THROWS_AS(CoefficientExpr::parse("theta0"), ExprError);
  CHECK_THROWS_AS(CoefficientExpr::parse("sqrt(2)"), ExprError);
}

TEST_CASE("variable usage is tracked") {
  auto e = CoefficientExpr::parse("x + exp(l)*beta");
  CHECK(e.uses_x());
  CHECK(e.uses_l());
  CHECK(e.uses_beta());
  CHECK_FALSE(e.uses_theta());

  auto f = CoefficientExpr::parse("theta2 - theta1");
  CHECK(f.max_theta_index() == 2);
  CHECK_FALSE(f.uses_x());
}

TEST_CASE("offset builds shifted expressions") {
  EvalContext ctx;
  ctx.x = 1.5;
  auto e = CoefficientExpr::parse("x*x");
  auto shifted = e.offset(0.25);
  CHECK(shifted.eval(ctx) == doctest::Approx(2.5));
  CHECK(e.eval(ctx) == doctest::Approx(2.25));  // original untouched
}

TEST_CASE("constant factory") {
  CHECK(CoefficientExpr::constant(3.25).eval({}) == 3.25);
  CHECK_FALSE(CoefficientExpr::constant(3.25).uses_x());
}

TEST_SUITE_END();
