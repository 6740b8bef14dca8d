#include "spider/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace spider {

ControlSet ControlSet::singleton(std::vector<double> point) {
  ControlSet set;
  set.points.push_back(std::move(point));
  return set;
}

ControlSet ControlSet::list(std::vector<std::vector<double>> pts) {
  ControlSet set;
  set.points = std::move(pts);
  return set;
}

ControlSet ControlSet::uniform_interval(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("ControlSet: count must be >= 1");
  if (hi < lo) throw std::invalid_argument("ControlSet: empty interval");
  ControlSet set;
  if (count == 1) {
    set.points.push_back({0.5 * (lo + hi)});
    return set;
  }
  for (int m = 0; m < count; ++m) {
    set.points.push_back({lo + (hi - lo) * m / (count - 1)});
  }
  return set;
}

ControlSet ControlSet::uniform_box(const std::vector<double>& lo,
                                   const std::vector<double>& hi, int count_per_axis) {
  if (lo.size() != hi.size() || lo.empty()) {
    throw std::invalid_argument("ControlSet: box bounds mismatch");
  }
  if (count_per_axis < 1) throw std::invalid_argument("ControlSet: count must be >= 1");
  const std::size_t dim = lo.size();
  std::vector<std::vector<double>> axes(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    auto axis = uniform_interval(lo[d], hi[d], count_per_axis);
    for (const auto& p : axis.points) axes[d].push_back(p[0]);
  }
  ControlSet set;
  std::vector<std::size_t> idx(dim, 0);
  for (;;) {
    std::vector<double> point(dim);
    for (std::size_t d = 0; d < dim; ++d) point[d] = axes[d][idx[d]];
    set.points.push_back(std::move(point));
    std::size_t d = 0;
    while (d < dim && ++idx[d] == axes[d].size()) {
      idx[d] = 0;
      ++d;
    }
    if (d == dim) break;
  }
  return set;
}

void ControlSet::validate(int expected_dim) const {
  if (points.empty()) throw std::invalid_argument("ControlSet: empty");
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != expected_dim) {
      throw std::invalid_argument("ControlSet: point dimension mismatch");
    }
  }
}

void ProblemData::validate_structure() const {
  network.validate();
  if (!(discount > 0.0)) throw std::invalid_argument("ProblemData: discount must be > 0");
  const std::size_t rays = static_cast<std::size_t>(network.ray_count);
  auto check_count = [&](const auto& v, const char* name) {
    if (v.size() != rays) {
      throw std::invalid_argument(std::string("ProblemData: wrong number of ") + name);
    }
  };
  check_count(sigma, "sigma coefficients");
  check_count(drift, "drift coefficients");
  check_count(run_cost, "running costs");
  check_count(spin, "spin weights");
  check_count(lateral, "lateral boundary data");
  check_count(terminal, "terminal data");
  check_count(ray_controls, "ray control sets");

  for (std::size_t i = 0; i < rays; ++i) {
    ray_controls[i].validate(1);
    for (const CoefficientExpr* e : {&sigma[i], &drift[i], &run_cost[i]}) {
      if (e->uses_theta()) {
        throw std::invalid_argument("ray coefficient must not reference theta: " + e->source());
      }
    }
    if (spin[i].uses_x() || spin[i].uses_beta()) {
      throw std::invalid_argument("spin weight may only use l and theta: " + spin[i].source());
    }
    if (spin[i].max_theta_index() > network.ray_count) {
      throw std::invalid_argument("spin weight references theta beyond ray count");
    }
    if (lateral[i].uses_x() || lateral[i].uses_beta() || lateral[i].uses_theta()) {
      throw std::invalid_argument("lateral data may only use l: " + lateral[i].source());
    }
    if (terminal[i].uses_l() || terminal[i].uses_beta() || terminal[i].uses_theta()) {
      throw std::invalid_argument("terminal data may only use x: " + terminal[i].source());
    }
  }
  if (junction_cost.uses_x() || junction_cost.uses_beta()) {
    throw std::invalid_argument("junction cost may only use l and theta");
  }
  if (junction_cost.max_theta_index() > network.ray_count) {
    throw std::invalid_argument("junction cost references theta beyond ray count");
  }
  vertex_control.validate(network.ray_count);
}

namespace {

void track(CoefficientBounds& b, double v, double prev, double dx_axis, double dl_axis,
           double prev_l, bool have_prev_x, bool have_prev_l) {
  b.sup_abs = std::max(b.sup_abs, std::abs(v));
  if (have_prev_x && dx_axis > 0.0) {
    b.lip_x = std::max(b.lip_x, std::abs(v - prev) / dx_axis);
  }
  if (have_prev_l && dl_axis > 0.0) {
    b.lip_l = std::max(b.lip_l, std::abs(v - prev_l) / dl_axis);
  }
}

}  // namespace

AssumptionReport validate_assumptions(const ProblemData& data, int samples_per_axis,
                                      double tol) {
  if (samples_per_axis < 2) {
    throw std::invalid_argument("validate_assumptions: samples_per_axis must be >= 2");
  }
  data.validate_structure();
  const int rays = data.network.ray_count;
  const int n = samples_per_axis;
  const double dx = data.network.ray_length / (n - 1);
  const double dl = data.network.local_time_bound / (n - 1);

  AssumptionReport report;
  report.samples_per_axis = n;
  report.zeta_lower = std::numeric_limits<double>::infinity();
  report.sigma_lower = std::numeric_limits<double>::infinity();
  report.sigma_bounds.resize(static_cast<std::size_t>(rays));
  report.drift_bounds.resize(static_cast<std::size_t>(rays));
  report.cost_bounds.resize(static_cast<std::size_t>(rays));
  report.spin_bounds.resize(static_cast<std::size_t>(rays));
  bool fin_drift = true, fin_sigma = true, fin_cost = true, fin_spin = true,
       fin_junction = true;

  auto record = [](bool& flag, double v) {
    if (!std::isfinite(v)) flag = false;
    return v;
  };

  // Ray coefficients over (x, l) x ray controls.
  for (int i = 0; i < rays; ++i) {
    const auto& controls = data.ray_controls[static_cast<std::size_t>(i)];
    for (const auto& beta : controls.points) {
      std::vector<double> prev_l_sigma(static_cast<std::size_t>(n)),
          prev_l_drift(static_cast<std::size_t>(n)), prev_l_cost(static_cast<std::size_t>(n));
      for (int kl = 0; kl < n; ++kl) {
        double prev_sigma = 0.0, prev_drift = 0.0, prev_cost = 0.0;
        for (int jx = 0; jx < n; ++jx) {
          EvalContext ctx;
          ctx.x = jx * dx;
          ctx.l = kl * dl;
          ctx.beta = beta[0];
          const double sv = record(fin_sigma, data.sigma[static_cast<std::size_t>(i)].eval(ctx));
          const double bv = record(fin_drift, data.drift[static_cast<std::size_t>(i)].eval(ctx));
          const double hv = record(fin_cost, data.run_cost[static_cast<std::size_t>(i)].eval(ctx));
          report.sigma_lower = std::min(report.sigma_lower, sv);
          report.sigma_upper = std::max(report.sigma_upper, sv);
          track(report.sigma_bounds[static_cast<std::size_t>(i)], sv, prev_sigma, dx, dl,
                prev_l_sigma[static_cast<std::size_t>(jx)], jx > 0, kl > 0);
          track(report.drift_bounds[static_cast<std::size_t>(i)], bv, prev_drift, dx, dl,
                prev_l_drift[static_cast<std::size_t>(jx)], jx > 0, kl > 0);
          track(report.cost_bounds[static_cast<std::size_t>(i)], hv, prev_cost, dx, dl,
                prev_l_cost[static_cast<std::size_t>(jx)], jx > 0, kl > 0);
          prev_sigma = sv;
          prev_drift = bv;
          prev_cost = hv;
          prev_l_sigma[static_cast<std::size_t>(jx)] = sv;
          prev_l_drift[static_cast<std::size_t>(jx)] = bv;
          prev_l_cost[static_cast<std::size_t>(jx)] = hv;
        }
      }
    }
  }

  // Vertex coefficients over l x vertex controls.
  for (const auto& theta : data.vertex_control.points) {
    std::vector<double> prev_spin(static_cast<std::size_t>(rays));
    double prev_h0 = 0.0;
    for (int kl = 0; kl < n; ++kl) {
      EvalContext ctx;
      ctx.l = kl * dl;
      ctx.theta = theta;
      for (int i = 0; i < rays; ++i) {
        const double sv = record(fin_spin, data.spin[static_cast<std::size_t>(i)].eval(ctx));
        report.zeta_lower = std::min(report.zeta_lower, sv);
        report.zeta_upper = std::max(report.zeta_upper, sv);
        auto& b = report.spin_bounds[static_cast<std::size_t>(i)];
        b.sup_abs = std::max(b.sup_abs, std::abs(sv));
        if (kl > 0 && dl > 0.0) {
          b.lip_l = std::max(b.lip_l, std::abs(sv - prev_spin[static_cast<std::size_t>(i)]) / dl);
        }
        prev_spin[static_cast<std::size_t>(i)] = sv;
      }
      const double h0 = record(fin_junction, data.junction_cost.eval(ctx));
      auto& jb = report.junction_cost_bounds;
      jb.sup_abs = std::max(jb.sup_abs, std::abs(h0));
      if (kl > 0 && dl > 0.0) {
        jb.lip_l = std::max(jb.lip_l, std::abs(h0 - prev_h0) / dl);
      }
      prev_h0 = h0;
    }
  }

  for (int i = 0; i < rays; ++i) {
    const auto& db = report.drift_bounds[static_cast<std::size_t>(i)];
    const auto& cb = report.cost_bounds[static_cast<std::size_t>(i)];
    report.drift_bound = std::max(report.drift_bound, db.sup_abs + db.lip_x + db.lip_l);
    report.cost_bound = std::max(report.cost_bound, cb.sup_abs + cb.lip_x + cb.lip_l);
  }
  report.cost_bound = std::max(
      report.cost_bound,
      report.junction_cost_bounds.sup_abs + report.junction_cost_bounds.lip_l);

  report.pass_reg_drift = fin_drift;
  report.pass_reg_sigma = fin_sigma;
  report.pass_reg_cost = fin_cost;
  report.pass_reg_spin = fin_spin;
  report.pass_reg_junction = fin_junction;
  report.pass_spin = fin_spin && report.zeta_lower > tol;
  report.pass_ellipticity = fin_sigma && report.sigma_lower > tol;
  return report;
}

double hamiltonian_eval(const ProblemData& data, int ray, double x, double l,
                        double u, double gradient, double curvature) {
  const auto& controls = data.ray_controls[static_cast<std::size_t>(ray)];
  if (controls.points.empty()) throw std::invalid_argument("empty ray control set");
  double best = -std::numeric_limits<double>::infinity();
  EvalContext ctx;
  ctx.x = x;
  ctx.l = l;
  for (const auto& beta : controls.points) {
    ctx.beta = beta[0];
    const double v = -data.sigma[static_cast<std::size_t>(ray)].eval(ctx) * curvature +
                     data.drift[static_cast<std::size_t>(ray)].eval(ctx) * gradient +
                     data.run_cost[static_cast<std::size_t>(ray)].eval(ctx);
    best = std::max(best, v);
  }
  return data.discount * u + best;
}

double speed_eval(const ProblemData& data, int ray, double x, double l,
                  double gradient) {
  const auto& controls = data.ray_controls[static_cast<std::size_t>(ray)];
  if (controls.points.empty()) throw std::invalid_argument("empty ray control set");
  double best = -std::numeric_limits<double>::infinity();
  EvalContext ctx;
  ctx.x = x;
  ctx.l = l;
  for (const auto& beta : controls.points) {
    ctx.beta = beta[0];
    const double s = data.sigma[static_cast<std::size_t>(ray)].eval(ctx);
    if (!(s > 0.0)) {
      throw std::runtime_error("speed_eval: sigma <= 0 at a control point");
    }
    const double v = (data.drift[static_cast<std::size_t>(ray)].eval(ctx) * gradient +
                      data.run_cost[static_cast<std::size_t>(ray)].eval(ctx)) /
                     s;
    best = std::max(best, v);
  }
  return best;
}

KirchhoffResult kirchhoff_flux(const ProblemData& data, double l,
                               std::span<const double> gradients) {
  if (static_cast<int>(gradients.size()) != data.network.ray_count) {
    throw std::invalid_argument("kirchhoff_flux: gradient vector has wrong length");
  }
  if (data.vertex_control.points.empty()) {
    throw std::invalid_argument("empty vertex control set");
  }
  KirchhoffResult result;
  result.value = std::numeric_limits<double>::infinity();
  EvalContext ctx;
  ctx.l = l;
  for (std::size_t m = 0; m < data.vertex_control.points.size(); ++m) {
    ctx.theta = data.vertex_control.points[m];
    double v = data.junction_cost.eval(ctx);
    for (int i = 0; i < data.network.ray_count; ++i) {
      v += data.spin[static_cast<std::size_t>(i)].eval(ctx) *
           gradients[static_cast<std::size_t>(i)];
    }
    if (v < result.value) {
      result.value = v;
      result.control_index = m;
    }
  }
  return result;
}

double kirchhoff_speed_eval(const ProblemData& data, double x, double l,
                            double gradient) {
  if (data.vertex_control.points.empty()) {
    throw std::invalid_argument("empty vertex control set");
  }
  std::vector<double> speeds(static_cast<std::size_t>(data.network.ray_count));
  for (int i = 0; i < data.network.ray_count; ++i) {
    speeds[static_cast<std::size_t>(i)] = speed_eval(data, i, x, l, gradient);
  }
  double best = std::numeric_limits<double>::infinity();
  EvalContext ctx;
  ctx.l = l;
  for (const auto& theta : data.vertex_control.points) {
    ctx.theta = theta;
    double v = 0.0;
    for (int i = 0; i < data.network.ray_count; ++i) {
      v += data.spin[static_cast<std::size_t>(i)].eval(ctx) *
           speeds[static_cast<std::size_t>(i)];
    }
    best = std::min(best, v);
  }
  return best;
}

}  // namespace spider
