#include "spider/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spider/numerics.hpp"

namespace spider {

double LinearOracle::operator()(double x) const {
  const double k = std::sqrt(discount / sigma);
  return right_value * std::cosh(k * x) / std::cosh(k * length);
}

double LinearOracle::derivative(double x) const {
  const double k = std::sqrt(discount / sigma);
  return right_value * k * std::sinh(k * x) / std::cosh(k * length);
}

double LinearOracle::second_derivative(double x) const {
  const double k = std::sqrt(discount / sigma);
  return right_value * k * k * std::cosh(k * x) / std::cosh(k * length);
}

std::vector<double> LinearOracle::sample(int intervals) const {
  std::vector<double> out(static_cast<std::size_t>(intervals) + 1);
  for (int j = 0; j <= intervals; ++j) {
    out[static_cast<std::size_t>(j)] = (*this)(length * j / intervals);
  }
  return out;
}

bool smallness_ok(double grad_coef, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("smallness_ok: width must be > 0");
  const double bw = std::abs(grad_coef) * width;
  return 1.0 - bw * std::exp(bw) > 0.0;
}

namespace {

// Common pieces of the absorption formula.
struct AbsorptionTerms {
  double exp_bw;        // e^{|B| w}
  double one_minus_a;   // 1 - |B| w e^{|B| w}
  double denom;         // the kappa denominator
};

AbsorptionTerms absorption_terms(double absorb_scale, double width, double l_halfwidth,
                                 double reaction, double grad_coef) {
  AbsorptionTerms t;
  const double absB = std::abs(grad_coef);
  t.exp_bw = std::exp(absB * width);
  t.one_minus_a = 1.0 - absB * width * t.exp_bw;
  t.denom = 1.0 -
            width * absorb_scale * reaction * l_halfwidth * (t.exp_bw - 1.0) -
            width * width * absorb_scale * reaction * l_halfwidth * absB *
                std::exp(2.0 * absB * width) / t.one_minus_a;
  return t;
}

}  // namespace

bool kappa_ok(double absorb_scale, double width, double l_halfwidth, double reaction,
              double grad_coef) {
  if (!smallness_ok(grad_coef, width)) {
    throw std::invalid_argument("kappa_ok: smallness condition violated");
  }
  return absorption_terms(absorb_scale, width, l_halfwidth, reaction, grad_coef).denom > 0.0;
}

double sup_bound_M(const TestFunctionSpec& spec) {
  if (!(spec.reaction > 0.0)) throw std::invalid_argument("sup_bound_M: reaction must be > 0");
  double far_bound = 0.0;
  for (double z : spec.far_values) far_bound = std::max(far_bound, std::abs(z));
  return std::abs(spec.vertex_value) + far_bound + spec.l_halfwidth * spec.vertex_slope +
         std::abs(spec.gamma) +
         (std::abs(spec.forcing) + std::abs(spec.eta)) / spec.reaction;
}

double compute_S_beta(const TestFunctionSpec& spec) {
  if (!kappa_ok(spec.absorb_scale, spec.width, spec.l_halfwidth, spec.reaction,
                spec.grad_coef)) {
    throw std::invalid_argument("compute_S_beta: kappa condition violated");
  }
  const auto t = absorption_terms(spec.absorb_scale, spec.width, spec.l_halfwidth,
                                  spec.reaction, spec.grad_coef);
  const double absB = std::abs(spec.grad_coef);
  double far_bound = 0.0, boundary_gap = 0.0;
  for (double z : spec.far_values) {
    far_bound = std::max(far_bound, std::abs(z));
    boundary_gap = std::max(boundary_gap, std::abs(spec.gamma + z - spec.vertex_value));
  }
  const double c2 = spec.reaction * (std::abs(spec.vertex_value) + far_bound +
                                     std::abs(spec.gamma)) +
                    2.0 * (std::abs(spec.forcing) + std::abs(spec.eta));
  const double eb = spec.width * spec.absorb_scale;
  const double term1 = eb * absB *
                       (t.exp_bw / t.one_minus_a) *
                       (boundary_gap / spec.width + c2 * spec.width * t.exp_bw) / t.denom;
  const double term2 = eb *
                       (c2 * (t.exp_bw - 1.0) + std::abs(spec.forcing) + std::abs(spec.eta)) /
                       t.denom;
  return term1 + term2;
}

namespace {

// One sign region of psi'' = reaction*psi + s*grad_coef*psi' + c0.
struct Region {
  double x0;
  double part;   // particular solution -c0/reaction
  double a_pos, a_neg;
  double m_pos, m_neg;
  bool constant = false;

  double value(double x) const {
    if (constant) return part;
    const double d = x - x0;
    return part + a_pos * std::exp(m_pos * d) + a_neg * std::exp(m_neg * d);
  }
  double slope(double x) const {
    if (constant) return 0.0;
    const double d = x - x0;
    return a_pos * m_pos * std::exp(m_pos * d) + a_neg * m_neg * std::exp(m_neg * d);
  }
  double curvature(double x) const {
    if (constant) return 0.0;
    const double d = x - x0;
    return a_pos * m_pos * m_pos * std::exp(m_pos * d) +
           a_neg * m_neg * m_neg * std::exp(m_neg * d);
  }
};

struct CollarOde {
  double reaction, grad_coef, c0;

  Region start_region(double x0, double y0, double d0) const {
    Region reg;
    reg.x0 = x0;
    reg.part = -c0 / reaction;
    const double shifted = y0 - reg.part;  // y0 + c0/r
    if (d0 == 0.0 && shifted == 0.0) {
      reg.constant = true;
      return reg;
    }
    double sign = d0 > 0.0 ? 1.0 : (d0 < 0.0 ? -1.0 : 0.0);
    if (sign == 0.0) {
      // Derivative starts at zero: branch picked by the curvature.
      sign = reaction * shifted > 0.0 ? 1.0 : -1.0;
    }
    const double sb = sign * grad_coef;
    const double disc = std::sqrt(sb * sb + 4.0 * reaction);
    reg.m_pos = 0.5 * (sb + disc);
    reg.m_neg = 0.5 * (sb - disc);
    reg.a_pos = (d0 - reg.m_neg * shifted) / disc;
    reg.a_neg = (reg.m_pos * shifted - d0) / disc;
    return reg;
  }

  // Smallest x > from where the slope vanishes, or +inf.
  double next_slope_zero(const Region& reg, double from) const {
    if (reg.constant || grad_coef == 0.0) {
      // With no |psi'| term the region equations are globally valid.
      return std::numeric_limits<double>::infinity();
    }
    const double num = -reg.a_neg * reg.m_neg;
    const double den = reg.a_pos * reg.m_pos;
    if (den == 0.0 || num / den <= 0.0) return std::numeric_limits<double>::infinity();
    const double x = reg.x0 + std::log(num / den) / (reg.m_pos - reg.m_neg);
    return x > from + 1e-15 * (1.0 + std::abs(from)) ? x
                                                     : std::numeric_limits<double>::infinity();
  }
};

struct CollarSolution {
  std::vector<Region> regions;
  std::vector<double> ends;  // right edge of each region
};

// Integrates the collar IVP from (0, y0) with slope d0 up to x_end.
CollarSolution integrate_collar(const CollarOde& ode, double y0, double d0, double x_end) {
  CollarSolution sol;
  double x = 0.0, y = y0, d = d0;
  for (int hops = 0; hops < 128; ++hops) {
    Region reg = ode.start_region(x, y, d);
    const double zero = ode.next_slope_zero(reg, x);
    if (zero >= x_end) {
      sol.regions.push_back(reg);
      sol.ends.push_back(x_end);
      return sol;
    }
    sol.regions.push_back(reg);
    sol.ends.push_back(zero);
    y = reg.value(zero);
    d = 0.0;
    x = zero;
  }
  throw std::runtime_error("collar ODE: too many sign regions");
}

double eval_end_value(const CollarSolution& sol) {
  return sol.regions.back().value(sol.ends.back());
}

struct CollarEval {
  double value, slope, curvature;
};

CollarEval eval_at(const CollarSolution& sol, double x) {
  std::size_t r = 0;
  while (r + 1 < sol.regions.size() && x > sol.ends[r]) ++r;
  return {sol.regions[r].value(x), sol.regions[r].slope(x), sol.regions[r].curvature(x)};
}

struct BracketFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Semismooth Newton on the fine grid; fallback when shooting cannot bracket.
// Returns values at the nodes; derivatives are reconstructed by the caller.
std::vector<double> solve_collar_fd(const CollarOde& ode, double left, double right,
                                    double width, int nx) {
  const double h = width / nx;
  std::vector<double> u(static_cast<std::size_t>(nx) + 1);
  for (int j = 0; j <= nx; ++j) {
    u[static_cast<std::size_t>(j)] = left + (right - left) * j / nx;
  }
  const std::size_t m = static_cast<std::size_t>(nx) - 1;
  std::vector<double> lower(m), diag(m), upper(m), rhs(m);
  for (int it = 0; it < 100; ++it) {
    double worst = 0.0;
    for (std::size_t j = 1; j < static_cast<std::size_t>(nx); ++j) {
      const double d1c = (u[j + 1] - u[j - 1]) / (2.0 * h);
      const double d2c = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
      const double res = ode.reaction * u[j] - d2c + ode.grad_coef * std::abs(d1c) + ode.c0;
      worst = std::max(worst, std::abs(res));
      const double sgn = d1c >= 0.0 ? 1.0 : -1.0;
      rhs[j - 1] = -res;
      diag[j - 1] = ode.reaction + 2.0 / (h * h);
      lower[j - 1] = -1.0 / (h * h) - ode.grad_coef * sgn / (2.0 * h);
      upper[j - 1] = -1.0 / (h * h) + ode.grad_coef * sgn / (2.0 * h);
    }
    if (worst < 1e-12 * (1.0 + std::abs(ode.c0) + std::abs(left) + std::abs(right))) break;
    auto step = solve_tridiagonal(lower, diag, upper, rhs);
    for (std::size_t j = 1; j < static_cast<std::size_t>(nx); ++j) u[j] += step[j - 1];
  }
  return u;
}

// Shooting on the initial slope; the end value is strictly increasing in it.
CollarSolution solve_collar_bvp(const CollarOde& ode, double left, double right,
                                double width) {
  auto end_value = [&](double d0) {
    return eval_end_value(integrate_collar(ode, left, d0, width));
  };
  const double guess = (right - left) / width;
  double step = 1.0 + std::abs(guess);
  double lo = guess, hi = guess;
  double flo = end_value(lo) - right;
  double fhi = flo;
  if (flo == 0.0) return integrate_collar(ode, left, guess, width);
  for (int k = 0; k < 64 && flo * fhi > 0.0; ++k) {
    if (flo > 0.0) {
      lo -= step;
      flo = end_value(lo) - right;
    } else {
      hi += step;
      fhi = end_value(hi) - right;
    }
    step *= 2.0;
  }
  if (flo * fhi > 0.0) {
    throw BracketFailure("collar ODE: shooting failed to bracket");
  }
  for (int it = 0; it < 4096; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = end_value(mid) - right;
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    (fm < 0.0 ? lo : hi) = mid;
  }
  return integrate_collar(ode, left, 0.5 * (lo + hi), width);
}

}  // namespace

double TestFunction::at(int ray, int li, int xi) const {
  const std::size_t nx = x_nodes.size(), nl = l_nodes.size();
  return values[(static_cast<std::size_t>(ray) * nl + static_cast<std::size_t>(li)) * nx +
                static_cast<std::size_t>(xi)];
}

double TestFunction::slope_at(int ray, int li, int xi) const {
  const std::size_t nx = x_nodes.size(), nl = l_nodes.size();
  return d1[(static_cast<std::size_t>(ray) * nl + static_cast<std::size_t>(li)) * nx +
            static_cast<std::size_t>(xi)];
}

double TestFunction::curvature_at(int ray, int li, int xi) const {
  const std::size_t nx = x_nodes.size(), nl = l_nodes.size();
  return d2[(static_cast<std::size_t>(ray) * nl + static_cast<std::size_t>(li)) * nx +
            static_cast<std::size_t>(xi)];
}

double TestFunction::max_abs_slope() const {
  double worst = 0.0;
  for (double v : d1) worst = std::max(worst, std::abs(v));
  return worst;
}

double TestFunction::max_residual() const {
  double worst = 0.0;
  const double c0 = spec.forcing + spec.eta;
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    const double res = spec.reaction * values[idx] - d2[idx] +
                       spec.grad_coef * std::abs(d1[idx]) + c0;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double TestFunction::flux_identity_defect() const {
  const double h = x_nodes[1] - x_nodes[0];
  const double c0 = spec.forcing + spec.eta;
  double worst = 0.0;
  std::vector<double> integrand(x_nodes.size());
  for (int ray = 0; ray < spec.ray_count(); ++ray) {
    for (std::size_t li = 0; li < l_nodes.size(); ++li) {
      for (std::size_t xi = 0; xi < x_nodes.size(); ++xi) {
        integrand[xi] = spec.reaction * at(ray, static_cast<int>(li), static_cast<int>(xi)) +
                        spec.grad_coef *
                            std::abs(slope_at(ray, static_cast<int>(li), static_cast<int>(xi))) +
                        c0;
      }
      const double iint = double_integral(integrand, h);
      const double lhs = spec.gamma + spec.far_values[static_cast<std::size_t>(ray)] -
                         spec.vertex_value;
      const double rhs = spec.width * slope_at(ray, static_cast<int>(li), 0) + iint;
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

double TestFunction::averaged_double_integral(int ray, int li) const {
  const double h = x_nodes[1] - x_nodes[0];
  std::vector<double> row(x_nodes.size());
  for (std::size_t xi = 0; xi < x_nodes.size(); ++xi) {
    row[xi] = at(ray, li, static_cast<int>(xi));
  }
  return 2.0 / (spec.width * spec.width) * double_integral(row, h);
}

TestFunction solve_param_ode(const TestFunctionSpec& spec, int nx_fine, int nl_samples) {
  if (spec.far_values.empty()) {
    throw std::invalid_argument("solve_param_ode: no rays");
  }
  if (!(spec.reaction > 0.0) || !(spec.width > 0.0)) {
    throw std::invalid_argument("solve_param_ode: reaction and width must be > 0");
  }
  if (!smallness_ok(spec.grad_coef, spec.width)) {
    throw std::invalid_argument("solve_param_ode: smallness condition violated");
  }
  if (nx_fine < 2) throw std::invalid_argument("solve_param_ode: nx_fine too small");

  TestFunction tf;
  tf.spec = spec;
  tf.x_nodes.resize(static_cast<std::size_t>(nx_fine) + 1);
  for (int j = 0; j <= nx_fine; ++j) tf.x_nodes[static_cast<std::size_t>(j)] = spec.width * j / nx_fine;
  tf.x_nodes.back() = spec.width;
  if (spec.l_halfwidth > 0.0 && nl_samples >= 1) {
    tf.l_nodes.resize(static_cast<std::size_t>(nl_samples) + 1);
    for (int k = 0; k <= nl_samples; ++k) {
      tf.l_nodes[static_cast<std::size_t>(k)] =
          spec.center_l - spec.l_halfwidth + 2.0 * spec.l_halfwidth * k / nl_samples;
    }
  } else {
    tf.l_nodes = {spec.center_l};
  }

  const std::size_t total =
      static_cast<std::size_t>(spec.ray_count()) * tf.l_nodes.size() * tf.x_nodes.size();
  tf.values.resize(total);
  tf.d1.resize(total);
  tf.d2.resize(total);

  const CollarOde ode{spec.reaction, spec.grad_coef, spec.forcing + spec.eta};
  for (int ray = 0; ray < spec.ray_count(); ++ray) {
    for (std::size_t li = 0; li < tf.l_nodes.size(); ++li) {
      const double l_shift = spec.vertex_slope * (tf.l_nodes[li] - spec.center_l);
      const double left = spec.vertex_value + l_shift;
      const double right = spec.far_values[static_cast<std::size_t>(ray)] + l_shift + spec.gamma;
      const std::size_t base0 =
          (static_cast<std::size_t>(ray) * tf.l_nodes.size() + li) * tf.x_nodes.size();
      try {
        const CollarSolution sol = solve_collar_bvp(ode, left, right, spec.width);
        // The stored curvature comes from the exponential basis, not the
        // equation, so the residual check below stays meaningful.
        for (std::size_t xi = 0; xi < tf.x_nodes.size(); ++xi) {
          const CollarEval e = eval_at(sol, tf.x_nodes[xi]);
          tf.values[base0 + xi] = e.value;
          tf.d1[base0 + xi] = e.slope;
          tf.d2[base0 + xi] = e.curvature;
        }
      } catch (const BracketFailure&) {
        const auto u = solve_collar_fd(ode, left, right, spec.width, nx_fine);
        const double h = spec.width / nx_fine;
        for (std::size_t xi = 0; xi < tf.x_nodes.size(); ++xi) {
          tf.values[base0 + xi] = u[xi];
          if (xi == 0) {
            tf.d1[base0 + xi] = (u[1] - u[0]) / h;
          } else if (xi + 1 == tf.x_nodes.size()) {
            tf.d1[base0 + xi] = (u[xi] - u[xi - 1]) / h;
          } else {
            tf.d1[base0 + xi] = (u[xi + 1] - u[xi - 1]) / (2.0 * h);
          }
          tf.d2[base0 + xi] = spec.reaction * u[xi] +
                              spec.grad_coef * std::abs(tf.d1[base0 + xi]) + spec.forcing +
                              spec.eta;
        }
      }
      // Pin the boundary rows exactly.
      const std::size_t base =
          (static_cast<std::size_t>(ray) * tf.l_nodes.size() + li) * tf.x_nodes.size();
      tf.values[base] = left;
      tf.values[base + tf.x_nodes.size() - 1] = right;
    }
  }
  return tf;
}

bool absorption_check(const TestFunction& tf, const TestFunctionSpec& spec) {
  const double required = spec.width * spec.absorb_scale *
                          (std::abs(spec.grad_coef) * tf.max_abs_slope() +
                           std::abs(spec.forcing) + std::abs(spec.eta));
  return spec.vertex_slope >= required - 1e-12 * (1.0 + std::abs(spec.vertex_slope));
}

std::vector<VanishingRow> vanishing_limit_study(TestFunctionSpec base,
                                                std::vector<VanishingRow> schedule,
                                                int nx_fine) {
  for (std::size_t r = 1; r < schedule.size(); ++r) {
    const auto& prev = schedule[r - 1];
    const auto& cur = schedule[r];
    if (!(cur.width < prev.width) || cur.l_halfwidth > prev.l_halfwidth ||
        cur.eta > prev.eta || cur.gamma > prev.gamma) {
      throw std::invalid_argument("vanishing_limit_study: schedule not decreasing");
    }
  }
  for (auto& row : schedule) {
    TestFunctionSpec spec = base;
    spec.width = row.width;
    spec.l_halfwidth = row.l_halfwidth;
    spec.eta = row.eta;
    spec.gamma = row.gamma;
    if (!row.far_values.empty()) spec.far_values = row.far_values;
    spec.vertex_slope = compute_S_beta(spec);
    row.slope_used = spec.vertex_slope;
    TestFunction tf = solve_param_ode(spec, nx_fine);
    double worst = 0.0;
    for (int ray = 0; ray < spec.ray_count(); ++ray) {
      for (std::size_t li = 0; li < tf.l_nodes.size(); ++li) {
        worst = std::max(worst, std::abs(tf.averaged_double_integral(ray, static_cast<int>(li)) -
                                         spec.vertex_value));
      }
    }
    row.deviation = worst;
  }
  return schedule;
}

Section3Result section3_test_function(std::span<const double> f_samples,
                                      std::span<const double> sigma_samples,
                                      double discount, double eps, double eta,
                                      double gamma, Section3Side side) {
  if (f_samples.size() != sigma_samples.size() || f_samples.size() < 3) {
    throw std::invalid_argument("section3_test_function: bad sample arrays");
  }
  const std::size_t n = f_samples.size();
  const double h = eps / static_cast<double>(n - 1);
  std::vector<double> curvature(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(sigma_samples[j] > 0.0)) {
      throw std::invalid_argument("section3_test_function: sigma sample <= 0");
    }
    const double base = discount * f_samples[j] / sigma_samples[j];
    curvature[j] = side == Section3Side::kSuper ? eta + base : -eta + base;
  }
  Section3Result result;
  result.lhs = double_integral(curvature, h);
  const double gap = f_samples[n - 1] - f_samples[0];
  result.rhs = side == Section3Side::kSuper ? gap - gamma : gap + gamma;
  result.vertex_slope = (result.rhs - result.lhs) / eps;
  result.inequality_holds =
      side == Section3Side::kSuper ? result.lhs >= result.rhs : result.lhs <= result.rhs;
  auto inner = cumulative_integral(curvature, h);
  auto outer = cumulative_integral(inner, h);
  result.phi.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    result.phi[j] = result.vertex_slope * (h * static_cast<double>(j)) + outer[j];
  }
  return result;
}

double section3_limit_quantity(std::span<const double> f_samples,
                               std::span<const double> g_samples,
                               std::span<const double> sigma_samples,
                               double discount, double eps) {
  if (f_samples.size() != g_samples.size() || f_samples.size() != sigma_samples.size() ||
      f_samples.size() < 3) {
    throw std::invalid_argument("section3_limit_quantity: bad sample arrays");
  }
  const std::size_t n = f_samples.size();
  const double h = eps / static_cast<double>(n - 1);
  std::vector<double> integrand(n);
  for (std::size_t j = 0; j < n; ++j) {
    integrand[j] = discount * (g_samples[j] - f_samples[j]) / sigma_samples[j];
  }
  return 2.0 / (eps * eps) * double_integral(integrand, h);
}

}  // namespace spider
