#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spider {

// Point at which a coefficient expression is evaluated. `theta` is the vertex
// control vector; it may be empty when the expression does not use it.
struct EvalContext {
  double x = 0.0;
  double l = 0.0;
  double beta = 0.0;
  std::span<const double> theta{};
};

struct ExprError : std::runtime_error {
  ExprError(std::string msg, std::size_t offset_in)
      : std::runtime_error(std::move(msg)), offset(offset_in) {}
  std::size_t offset;  // byte offset into the source text
};

// Arithmetic expression over {x, l, beta, theta1..thetaN} with operators
// + - * / ^ and functions min, max, abs, exp, sin, cos, pow.
class CoefficientExpr {
 public:
  CoefficientExpr();  // constant 0

  static CoefficientExpr parse(std::string_view text);
  static CoefficientExpr constant(double v);

  double eval(const EvalContext& ctx) const;

  bool uses_x() const { return uses_x_; }
  bool uses_l() const { return uses_l_; }
  bool uses_beta() const { return uses_beta_; }
  bool uses_theta() const { return max_theta_ > 0; }
  int max_theta_index() const { return max_theta_; }  // 1-based, 0 if unused

  // New expression evaluating to this one plus a constant.
  CoefficientExpr offset(double c) const;

  const std::string& source() const { return source_; }

 private:
  enum class Op : unsigned char {
    kConst, kVarX, kVarL, kVarBeta, kVarTheta,
    kAdd, kSub, kMul, kDiv, kNeg, kPow,
    kMin, kMax, kAbs, kExp, kSin, kCos,
  };
  struct Node {
    Op op;
    double value = 0.0;  // kConst
    int theta = 0;       // kVarTheta, 1-based
    int lhs = -1;
    int rhs = -1;
  };

  double eval_node(int node, const EvalContext& ctx) const;
  void scan_usage();
  int add_const(double v);

  std::vector<Node> nodes_;
  int root_ = -1;
  std::string source_;
  bool uses_x_ = false, uses_l_ = false, uses_beta_ = false;
  int max_theta_ = 0;

  friend class ExprParser;
};

}  // namespace spider
