#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spider/problem.hpp"

namespace spider {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw std::runtime_error(os.str());
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& origin, const Entry& e, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(e.value.c_str(), &end);
  if (end == e.value.c_str() || *end != '\0') {
    fail(origin, e.line, "value of '" + key + "' is not a number: '" + e.value + "'");
  }
  return v;
}

CoefficientExpr parse_expr_entry(const std::string& origin, const Entry& e,
                                 const std::string& key) {
  try {
    return CoefficientExpr::parse(e.value);
  } catch (const ExprError& err) {
    fail(origin, e.line,
         "in '" + key + "': " + err.what() + " (offset " + std::to_string(err.offset) + ")");
  }
}

std::vector<double> parse_tuple(const std::string& origin, int line, const std::string& text) {
  // "(a, b, c)" or a bare scalar.
  std::string body = trim(text);
  if (!body.empty() && body.front() == '(') {
    if (body.back() != ')') fail(origin, line, "unterminated tuple: '" + text + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(body);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    piece = trim(piece);
    if (piece.empty()) fail(origin, line, "empty tuple component in '" + text + "'");
    char* end = nullptr;
    const double v = std::strtod(piece.c_str(), &end);
    if (end == piece.c_str() || *end != '\0') {
      fail(origin, line, "bad number '" + piece + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) fail(origin, line, "empty tuple");
  return out;
}

ControlSet parse_control(const std::string& origin, const Entry& e, int dim) {
  const std::string text = trim(e.value);
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) {
    fail(origin, e.line, "control set must start with 'list:' or 'uniform:'");
  }
  const std::string kind = trim(text.substr(0, colon));
  const std::string body = trim(text.substr(colon + 1));
  if (kind == "list") {
    // Points separated by ';'.
    std::vector<std::vector<double>> pts;
    std::stringstream ss(body);
    std::string piece;
    while (std::getline(ss, piece, ';')) {
      piece = trim(piece);
      if (piece.empty()) continue;
      auto p = parse_tuple(origin, e.line, piece);
      if (static_cast<int>(p.size()) != dim) {
        fail(origin, e.line,
             "control point has dimension " + std::to_string(p.size()) + ", expected " +
                 std::to_string(dim));
      }
      pts.push_back(std::move(p));
    }
    if (pts.empty()) fail(origin, e.line, "empty control list");
    return ControlSet::list(std::move(pts));
  }
  if (kind == "uniform") {
    // Scalar: "lo, hi, count". Box: "(lo...), (hi...), count".
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : body) {
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == ',' && depth == 0) {
        parts.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) parts.push_back(trim(cur));
    if (parts.size() != 3) fail(origin, e.line, "uniform control needs lo, hi, count");
    const int count = std::atoi(parts[2].c_str());
    if (count < 1) fail(origin, e.line, "uniform control count must be >= 1");
    auto lo = parse_tuple(origin, e.line, parts[0]);
    auto hi = parse_tuple(origin, e.line, parts[1]);
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim) {
      fail(origin, e.line, "uniform control bounds have wrong dimension");
    }
    if (dim == 1) return ControlSet::uniform_interval(lo[0], hi[0], count);
    return ControlSet::uniform_box(lo, hi, count);
  }
  fail(origin, e.line, "unknown control kind '" + kind + "'");
}

}  // namespace

ProblemData parse_problem_text(const std::string& text, const std::string& origin) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, lineno, "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) fail(origin, lineno, "empty section name");
      sections[current];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
    if (current.empty()) fail(origin, lineno, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, lineno, "empty key");
    auto [it, inserted] = sections[current].emplace(key, Entry{value, lineno, false});
    if (!inserted) fail(origin, lineno, "duplicate key '" + key + "' in [" + current + "]");
  }

  auto section = [&](const std::string& name) -> Section& {
    auto it = sections.find(name);
    if (it == sections.end()) {
      throw std::runtime_error(origin + ": missing section [" + name + "]");
    }
    return it->second;
  };
  auto required = [&](Section& s, const std::string& sec_name,
                      const std::string& key) -> Entry& {
    auto it = s.find(key);
    if (it == s.end()) {
      throw std::runtime_error(origin + ": missing key '" + key + "' in [" + sec_name + "]");
    }
    it->second.used = true;
    return it->second;
  };

  ProblemData data;
  Section& net = section("network");
  data.network.ray_count = static_cast<int>(parse_double(origin, required(net, "network", "rays"), "rays"));
  data.network.ray_length = parse_double(origin, required(net, "network", "length"), "length");
  data.network.local_time_bound =
      parse_double(origin, required(net, "network", "local_time_bound"), "local_time_bound");
  data.discount = parse_double(origin, required(net, "network", "lambda"), "lambda");
  if (auto it = net.find("unbounded_local_time"); it != net.end()) {
    it->second.used = true;
    data.network.unbounded_local_time = it->second.value == "true" || it->second.value == "1";
  }
  data.network.validate();
  if (!(data.discount > 0.0)) {
    fail(origin, required(net, "network", "lambda").line, "lambda must be > 0");
  }

  const int rays = data.network.ray_count;
  for (int i = 1; i <= rays; ++i) {
    const std::string name = "coefficients.ray." + std::to_string(i);
    Section& sec = section(name);
    data.sigma.push_back(parse_expr_entry(origin, required(sec, name, "sigma"), "sigma"));
    data.drift.push_back(parse_expr_entry(origin, required(sec, name, "b"), "b"));
    data.run_cost.push_back(parse_expr_entry(origin, required(sec, name, "h"), "h"));
  }

  Section& vertex = section("coefficients.vertex");
  for (int i = 1; i <= rays; ++i) {
    const std::string key = "spin_" + std::to_string(i);
    data.spin.push_back(parse_expr_entry(origin, required(vertex, "coefficients.vertex", key), key));
  }
  data.junction_cost = parse_expr_entry(origin, required(vertex, "coefficients.vertex", "h0"), "h0");

  Section& controls = section("controls");
  for (int i = 1; i <= rays; ++i) {
    const std::string key = "ray_" + std::to_string(i);
    data.ray_controls.push_back(parse_control(origin, required(controls, "controls", key), 1));
  }
  data.vertex_control = parse_control(origin, required(controls, "controls", "vertex"), rays);

  Section& boundary = section("boundary");
  for (int i = 1; i <= rays; ++i) {
    const std::string chi_key = "chi_" + std::to_string(i);
    const std::string term_key = "terminal_" + std::to_string(i);
    data.lateral.push_back(parse_expr_entry(origin, required(boundary, "boundary", chi_key), chi_key));
    data.terminal.push_back(
        parse_expr_entry(origin, required(boundary, "boundary", term_key), term_key));
  }

  for (const auto& [sec_name, sec] : sections) {
    for (const auto& [key, entry] : sec) {
      if (!entry.used) {
        fail(origin, entry.line, "unknown key '" + key + "' in [" + sec_name + "]");
      }
    }
  }

  data.validate_structure();
  return data;
}

ProblemData load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), path);
}

}  // namespace spider
