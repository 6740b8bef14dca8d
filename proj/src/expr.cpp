#include "spider/expr.hpp"

#include "spider/numerics.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace spider {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

class ExprParser {
 public:
  explicit ExprParser(std::string_view text, CoefficientExpr& out)
      : text_(text), out_(out) {}

  void run() {
    out_.root_ = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ExprError("unexpected trailing input", pos_);
    }
  }

 private:
  using Node = CoefficientExpr::Node;
  using Op = CoefficientExpr::Op;

  int add(Node n) {
    out_.nodes_.push_back(n);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      skip_ws();
      if (consume('+')) {
        int rhs = parse_term();
        lhs = add({Op::kAdd, 0.0, 0, lhs, rhs});
      } else if (consume('-')) {
        int rhs = parse_term();
        lhs = add({Op::kSub, 0.0, 0, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (consume('*')) {
        int rhs = parse_unary();
        lhs = add({Op::kMul, 0.0, 0, lhs, rhs});
      } else if (consume('/')) {
        int rhs = parse_unary();
        lhs = add({Op::kDiv, 0.0, 0, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    skip_ws();
    if (consume('-')) {
      int operand = parse_unary();
      return add({Op::kNeg, 0.0, 0, operand, -1});
    }
    if (consume('+')) {
      return parse_unary();
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    skip_ws();
    if (consume('^')) {
      int exponent = parse_unary();  // right associative
      return add({Op::kPow, 0.0, 0, base, exponent});
    }
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) {
      throw ExprError("unexpected end of expression", pos_);
    }
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (!consume(')')) throw ExprError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_identifier();
    }
    throw ExprError(std::string("unexpected character '") + c + "'", pos_);
  }

  int parse_number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ExprError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    return add({Op::kConst, v, 0, -1, -1});
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "x") return add({Op::kVarX, 0.0, 0, -1, -1});
    if (name == "l") return add({Op::kVarL, 0.0, 0, -1, -1});
    if (name == "beta") return add({Op::kVarBeta, 0.0, 0, -1, -1});
    if (name.rfind("theta", 0) == 0 && name.size() > 5) {
      int idx = 0;
      for (std::size_t i = 5; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) {
          throw ExprError("unknown identifier '" + name + "'", start);
        }
        idx = idx * 10 + (name[i] - '0');
      }
      if (idx < 1) throw ExprError("theta index must be >= 1", start);
      return add({Op::kVarTheta, 0.0, idx, -1, -1});
    }
    // Function call.
    if (peek('(')) {
      return parse_call(name, start);
    }
    throw ExprError("unknown identifier '" + name + "'", start);
  }

  int parse_call(const std::string& name, std::size_t start) {
    consume('(');
    std::vector<int> args;
    if (!peek(')')) {
      args.push_back(parse_expr());
      while (consume(',')) args.push_back(parse_expr());
    }
    if (!consume(')')) throw ExprError("expected ')'", pos_);
    auto need = [&](std::size_t n) {
      if (args.size() != n) {
        throw ExprError(name + " expects " + std::to_string(n) + " argument(s)", start);
      }
    };
    if (name == "min") { need(2); return add({Op::kMin, 0.0, 0, args[0], args[1]}); }
    if (name == "max") { need(2); return add({Op::kMax, 0.0, 0, args[0], args[1]}); }
    if (name == "abs") { need(1); return add({Op::kAbs, 0.0, 0, args[0], -1}); }
    if (name == "exp") { need(1); return add({Op::kExp, 0.0, 0, args[0], -1}); }
    if (name == "sin") { need(1); return add({Op::kSin, 0.0, 0, args[0], -1}); }
    if (name == "cos") { need(1); return add({Op::kCos, 0.0, 0, args[0], -1}); }
    if (name == "pow") { need(2); return add({Op::kPow, 0.0, 0, args[0], args[1]}); }
    throw ExprError("unknown function '" + name + "'", start);
  }

  std::string_view text_;
  CoefficientExpr& out_;
  std::size_t pos_ = 0;
};

CoefficientExpr::CoefficientExpr() {
  nodes_.push_back({Op::kConst, 0.0, 0, -1, -1});
  root_ = 0;
  source_ = "0";
}

CoefficientExpr CoefficientExpr::parse(std::string_view text) {
  CoefficientExpr expr;
  expr.nodes_.clear();
  expr.source_.assign(text);
  ExprParser parser(text, expr);
  parser.run();
  expr.scan_usage();
  return expr;
}

CoefficientExpr CoefficientExpr::constant(double v) {
  CoefficientExpr expr;
  expr.nodes_[0].value = v;
  expr.source_ = format_full(v);
  return expr;
}

int CoefficientExpr::add_const(double v) {
  nodes_.push_back({Op::kConst, v, 0, -1, -1});
  return static_cast<int>(nodes_.size()) - 1;
}

CoefficientExpr CoefficientExpr::offset(double c) const {
  CoefficientExpr expr = *this;
  const int k = expr.add_const(c);
  Node combined{Op::kAdd, 0.0, 0, expr.root_, k};
  expr.nodes_.push_back(combined);
  expr.root_ = static_cast<int>(expr.nodes_.size()) - 1;
  expr.source_ = "(" + source_ + ") + " + format_full(c);
  return expr;
}

double CoefficientExpr::eval(const EvalContext& ctx) const {
  return eval_node(root_, ctx);
}

double CoefficientExpr::eval_node(int node, const EvalContext& ctx) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  switch (n.op) {
    case Op::kConst: return n.value;
    case Op::kVarX: return ctx.x;
    case Op::kVarL: return ctx.l;
    case Op::kVarBeta: return ctx.beta;
    case Op::kVarTheta: {
      const std::size_t idx = static_cast<std::size_t>(n.theta) - 1;
      if (idx >= ctx.theta.size()) {
        throw std::out_of_range("theta" + std::to_string(n.theta) +
                                " evaluated without a control vector of that size");
      }
      return ctx.theta[idx];
    }
    case Op::kAdd: return eval_node(n.lhs, ctx) + eval_node(n.rhs, ctx);
    case Op::kSub: return eval_node(n.lhs, ctx) - eval_node(n.rhs, ctx);
    case Op::kMul: return eval_node(n.lhs, ctx) * eval_node(n.rhs, ctx);
    case Op::kDiv: return eval_node(n.lhs, ctx) / eval_node(n.rhs, ctx);
    case Op::kNeg: return -eval_node(n.lhs, ctx);
    case Op::kPow: return std::pow(eval_node(n.lhs, ctx), eval_node(n.rhs, ctx));
    case Op::kMin: return std::min(eval_node(n.lhs, ctx), eval_node(n.rhs, ctx));
    case Op::kMax: return std::max(eval_node(n.lhs, ctx), eval_node(n.rhs, ctx));
    case Op::kAbs: return std::abs(eval_node(n.lhs, ctx));
    case Op::kExp: return std::exp(eval_node(n.lhs, ctx));
    case Op::kSin: return std::sin(eval_node(n.lhs, ctx));
    case Op::kCos: return std::cos(eval_node(n.lhs, ctx));
  }
  return 0.0;
}

void CoefficientExpr::scan_usage() {
  uses_x_ = uses_l_ = uses_beta_ = false;
  max_theta_ = 0;
  for (const Node& n : nodes_) {
    switch (n.op) {
      case Op::kVarX: uses_x_ = true; break;
      case Op::kVarL: uses_l_ = true; break;
      case Op::kVarBeta: uses_beta_ = true; break;
      case Op::kVarTheta: max_theta_ = std::max(max_theta_, n.theta); break;
      default: break;
    }
  }
}

}  // namespace spider
