#include "spider/hjb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spider/numerics.hpp"

namespace spider {

namespace {

// Coefficients of all controls at the interior nodes of one ray/level.
struct FrozenCoeffs {
  int nx = 0;
  std::size_t controls = 0;
  // Layout [control][interior node j-1], j = 1..nx-1.
  std::vector<double> sigma, drift, cost;

  double sig(std::size_t m, int j) const {
    return sigma[m * static_cast<std::size_t>(nx - 1) + static_cast<std::size_t>(j - 1)];
  }
  double b(std::size_t m, int j) const {
    return drift[m * static_cast<std::size_t>(nx - 1) + static_cast<std::size_t>(j - 1)];
  }
  double h(std::size_t m, int j) const {
    return cost[m * static_cast<std::size_t>(nx - 1) + static_cast<std::size_t>(j - 1)];
  }
};

FrozenCoeffs eval_coeffs(const ProblemData& data, int ray, double l, const Grid& grid) {
  FrozenCoeffs out;
  out.nx = grid.nx();
  const auto& controls = data.ray_controls[static_cast<std::size_t>(ray)];
  out.controls = controls.size();
  const std::size_t stride = static_cast<std::size_t>(out.nx - 1);
  out.sigma.resize(out.controls * stride);
  out.drift.resize(out.controls * stride);
  out.cost.resize(out.controls * stride);
  EvalContext ctx;
  ctx.l = l;
  for (std::size_t m = 0; m < out.controls; ++m) {
    ctx.beta = controls.points[m][0];
    for (int j = 1; j < out.nx; ++j) {
      ctx.x = grid.x_nodes[static_cast<std::size_t>(j)];
      const std::size_t idx = m * stride + static_cast<std::size_t>(j - 1);
      out.sigma[idx] = data.sigma[static_cast<std::size_t>(ray)].eval(ctx);
      out.drift[idx] = data.drift[static_cast<std::size_t>(ray)].eval(ctx);
      out.cost[idx] = data.run_cost[static_cast<std::size_t>(ray)].eval(ctx);
      if (!(out.sigma[idx] > 0.0)) {
        throw std::runtime_error("ray scheme: sigma <= 0 inside the domain");
      }
    }
  }
  return out;
}

// Discrete control value at node j given the current iterate.
double control_value(const FrozenCoeffs& c, std::size_t m, int j,
                     const std::vector<double>& u, double dx, double inv_dx2,
                     bool upwind) {
  const double second = (u[static_cast<std::size_t>(j + 1)] - 2.0 * u[static_cast<std::size_t>(j)] +
                         u[static_cast<std::size_t>(j - 1)]) *
                        inv_dx2;
  const double b = c.b(m, j);
  double first;
  if (!upwind) {
    first = (u[static_cast<std::size_t>(j + 1)] - u[static_cast<std::size_t>(j - 1)]) / (2.0 * dx);
  } else if (b >= 0.0) {
    first = (u[static_cast<std::size_t>(j)] - u[static_cast<std::size_t>(j - 1)]) / dx;
  } else {
    first = (u[static_cast<std::size_t>(j + 1)] - u[static_cast<std::size_t>(j)]) / dx;
  }
  return -c.sig(m, j) * second + b * first + c.h(m, j);
}

double scheme_residual(const FrozenCoeffs& c, const std::vector<double>& u, double lambda,
                       double dx, double inv_dx2, bool upwind) {
  double worst = 0.0;
  for (int j = 1; j < c.nx; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < c.controls; ++m) {
      best = std::max(best, control_value(c, m, j, u, dx, inv_dx2, upwind));
    }
    worst = std::max(worst, std::abs(lambda * u[static_cast<std::size_t>(j)] + best));
  }
  return worst;
}

RayBvpResult solve_ray_with_coeffs(const FrozenCoeffs& coeffs, const ProblemData& data,
                                   double vertex_value, double right_value,
                                   const Grid& grid, const SolverOptions& options,
                                   const std::vector<int>* warm_policy) {
  const int nx = grid.nx();
  const double dx = grid.dx;
  const double inv_dx2 = (nx / grid.network.ray_length) * (nx / grid.network.ray_length);
  const double lambda = data.discount;
  const std::size_t interior = static_cast<std::size_t>(nx - 1);

  RayBvpResult result;
  result.policy.assign(interior, 0);
  if (warm_policy && warm_policy->size() == interior) result.policy = *warm_policy;

  std::vector<double> lower(interior), diag(interior), upper(interior), rhs(interior);
  std::vector<double> u(static_cast<std::size_t>(nx) + 1, 0.0);
  u.front() = vertex_value;
  u.back() = right_value;

  for (int it = 1; it <= options.max_policy_iters; ++it) {
    result.iterations = it;
    // Frozen-control linear solve.
    for (int j = 1; j < nx; ++j) {
      const std::size_t m = static_cast<std::size_t>(result.policy[static_cast<std::size_t>(j - 1)]);
      const double sig = coeffs.sig(m, j);
      const double b = coeffs.b(m, j);
      double lo, di, up;
      if (!options.upwind) {
        di = lambda + 2.0 * sig * inv_dx2;
        lo = -sig * inv_dx2 - b / (2.0 * dx);
        up = -sig * inv_dx2 + b / (2.0 * dx);
      } else if (b >= 0.0) {
        di = lambda + 2.0 * sig * inv_dx2 + b / dx;
        lo = -sig * inv_dx2 - b / dx;
        up = -sig * inv_dx2;
      } else {
        di = lambda + 2.0 * sig * inv_dx2 - b / dx;
        lo = -sig * inv_dx2;
        up = -sig * inv_dx2 + b / dx;
      }
      const std::size_t row = static_cast<std::size_t>(j - 1);
      lower[row] = lo;
      diag[row] = di;
      upper[row] = up;
      rhs[row] = -coeffs.h(m, j);
      if (j == 1) rhs[row] -= lo * vertex_value;
      if (j == nx - 1) rhs[row] -= up * right_value;
    }
    auto interior_values = solve_tridiagonal(lower, diag, upper, rhs);
    for (int j = 1; j < nx; ++j) u[static_cast<std::size_t>(j)] = interior_values[static_cast<std::size_t>(j - 1)];

    // Policy improvement; ties resolved by control-set order.
    bool changed = false;
    for (int j = 1; j < nx; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int best_m = 0;
      for (std::size_t m = 0; m < coeffs.controls; ++m) {
        const double v = control_value(coeffs, m, j, u, dx, inv_dx2, options.upwind);
        if (v > best) {
          best = v;
          best_m = static_cast<int>(m);
        }
      }
      if (result.policy[static_cast<std::size_t>(j - 1)] != best_m) {
        result.policy[static_cast<std::size_t>(j - 1)] = best_m;
        changed = true;
      }
    }
    result.residual = scheme_residual(coeffs, u, lambda, dx, inv_dx2, options.upwind);
    result.residual_history.push_back(result.residual);
    if (!changed && result.residual <= options.tol) break;
    if (it == options.max_policy_iters) {
      throw std::runtime_error("policy iteration failed to converge");
    }
  }

  result.values = std::move(u);
  if (options.second_order_flux && nx >= 2) {
    result.flux = (-3.0 * result.values[0] + 4.0 * result.values[1] - result.values[2]) /
                  (2.0 * dx);
  } else {
    result.flux = (result.values[1] - result.values[0]) / dx;
  }
  return result;
}

}  // namespace

RayBvpResult solve_ray_bvp(const ProblemData& data, int ray, double l,
                           double vertex_value, double right_value, const Grid& grid,
                           const SolverOptions& options,
                           const std::vector<int>* warm_policy) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_ray_bvp: tol must be > 0");
  const FrozenCoeffs coeffs = eval_coeffs(data, ray, l, grid);
  return solve_ray_with_coeffs(coeffs, data, vertex_value, right_value, grid, options,
                               warm_policy);
}

double discrete_residual(const ProblemData& data, const Grid& grid,
                         const NetworkFunction& f, int ray, int xi, int li,
                         const SolverOptions& options) {
  if (xi < 1 || xi >= grid.nx()) {
    throw std::invalid_argument("discrete_residual: interior x node required");
  }
  const double dx = grid.dx;
  const double inv_dx2 = (grid.nx() / grid.network.ray_length) *
                         (grid.nx() / grid.network.ray_length);
  const double l = grid.l_levels[static_cast<std::size_t>(li)];
  EvalContext ctx;
  ctx.l = l;
  ctx.x = grid.x_nodes[static_cast<std::size_t>(xi)];
  const double um = f(ray, xi - 1, li), uc = f(ray, xi, li), up = f(ray, xi + 1, li);
  const double second = (up - 2.0 * uc + um) * inv_dx2;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& beta : data.ray_controls[static_cast<std::size_t>(ray)].points) {
    ctx.beta = beta[0];
    const double b = data.drift[static_cast<std::size_t>(ray)].eval(ctx);
    double first;
    if (!options.upwind) {
      first = (up - um) / (2.0 * dx);
    } else if (b >= 0.0) {
      first = (uc - um) / dx;
    } else {
      first = (up - uc) / dx;
    }
    const double v = -data.sigma[static_cast<std::size_t>(ray)].eval(ctx) * second +
                     b * first + data.run_cost[static_cast<std::size_t>(ray)].eval(ctx);
    best = std::max(best, v);
  }
  return data.discount * f(ray, xi, li) + best;
}

namespace {

std::vector<double> stored_fluxes(const NetworkFunction& f, int li,
                                  const SolverOptions& options) {
  const Grid& grid = f.grid();
  std::vector<double> fluxes(static_cast<std::size_t>(f.ray_count()));
  for (int i = 0; i < f.ray_count(); ++i) {
    if (options.second_order_flux && grid.nx() >= 2) {
      fluxes[static_cast<std::size_t>(i)] =
          (-3.0 * f(i, 0, li) + 4.0 * f(i, 1, li) - f(i, 2, li)) / (2.0 * grid.dx);
    } else {
      fluxes[static_cast<std::size_t>(i)] = (f(i, 1, li) - f(i, 0, li)) / grid.dx;
    }
  }
  return fluxes;
}

double max_spin_weight(const ProblemData& data, const Grid& grid) {
  double worst = 0.0;
  EvalContext ctx;
  for (double l : grid.l_levels) {
    ctx.l = l;
    for (const auto& theta : data.vertex_control.points) {
      ctx.theta = theta;
      for (int i = 0; i < data.network.ray_count; ++i) {
        worst = std::max(worst, std::abs(data.spin[static_cast<std::size_t>(i)].eval(ctx)));
      }
    }
  }
  return worst;
}

struct LevelSolve {
  std::vector<RayBvpResult> rays;
  std::vector<double> fluxes;
  int max_iters = 0;
};

LevelSolve solve_level(const ProblemData& data, const Grid& grid, double l,
                       double vertex_value, const SolverOptions& options,
                       std::vector<std::vector<int>>* warm) {
  const int rays = data.network.ray_count;
  LevelSolve out;
  out.rays.resize(static_cast<std::size_t>(rays));
  out.fluxes.resize(static_cast<std::size_t>(rays));
  EvalContext ctx;
  ctx.l = l;
  parallel_for(
      static_cast<std::size_t>(rays),
      [&](std::size_t i) {
        EvalContext local;
        local.l = l;
        const double right = data.lateral[i].eval(local);
        const std::vector<int>* warm_policy =
            warm && warm->size() == static_cast<std::size_t>(rays) ? &(*warm)[i] : nullptr;
        out.rays[i] = solve_ray_bvp(data, static_cast<int>(i), l, vertex_value, right,
                                    grid, options, warm_policy);
        out.fluxes[i] = out.rays[i].flux;
      },
      options.threads);
  for (const auto& r : out.rays) out.max_iters = std::max(out.max_iters, r.iterations);
  if (warm) {
    warm->resize(static_cast<std::size_t>(rays));
    for (std::size_t i = 0; i < out.rays.size(); ++i) (*warm)[i] = out.rays[i].policy;
  }
  return out;
}

}  // namespace

SolveReport march_local_time(const ProblemData& data, const Grid& grid,
                             const SolverOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  data.validate_structure();
  if (!(grid.network == data.network)) {
    throw std::invalid_argument("march_local_time: grid network mismatch");
  }
  const int rays = data.network.ray_count;
  const int nl = grid.nl();
  const double big_k = data.network.local_time_bound;

  // Corner compatibility: the terminal datum must be continuous at the
  // vertex and agree with the lateral datum at (R, K).
  EvalContext ctx;
  double t_vertex = 0.0;
  for (int i = 0; i < rays; ++i) {
    ctx.x = 0.0;
    const double ti0 = data.terminal[static_cast<std::size_t>(i)].eval(ctx);
    if (i == 0) {
      t_vertex = ti0;
    } else if (std::abs(ti0 - t_vertex) > options.compat_tol) {
      throw std::runtime_error("terminal data discontinuous at the vertex");
    }
    ctx.x = data.network.ray_length;
    const double ti_r = data.terminal[static_cast<std::size_t>(i)].eval(ctx);
    EvalContext lat;
    lat.l = big_k;
    const double chi_k = data.lateral[static_cast<std::size_t>(i)].eval(lat);
    if (std::abs(ti_r - chi_k) > options.compat_tol) {
      throw std::runtime_error("terminal and lateral data incompatible at the corner");
    }
  }

  SolveReport report;
  report.dl = grid.dl;
  report.solution = NetworkFunction(grid);
  NetworkFunction& sol = report.solution;

  // Terminal level holds the Dirichlet datum.
  double vertex = 0.0;
  for (int i = 0; i < rays; ++i) {
    ctx.x = 0.0;
    vertex += data.terminal[static_cast<std::size_t>(i)].eval(ctx) / rays;
  }
  sol.set_vertex(nl, vertex);
  for (int i = 0; i < rays; ++i) {
    for (int j = 1; j <= grid.nx(); ++j) {
      ctx.x = grid.x_nodes[static_cast<std::size_t>(j)];
      sol.set(i, j, nl, data.terminal[static_cast<std::size_t>(i)].eval(ctx));
    }
  }

  // Stability restriction for the vertex transport, with a measured flux
  // response. The response is the change of the one-sided gradient under a
  // vertex perturbation, scaled back by dx.
  const double zeta_bar = max_spin_weight(data, grid);
  std::vector<std::vector<int>> warm;
  double flux_sensitivity = 1.0;
  {
    const double probe = 1e-4 * (1.0 + std::abs(vertex));
    LevelSolve base = solve_level(data, grid, big_k, vertex, options, nullptr);
    LevelSolve bumped = solve_level(data, grid, big_k, vertex + probe, options, nullptr);
    double worst = 0.0;
    for (int i = 0; i < rays; ++i) {
      worst = std::max(worst, std::abs(bumped.fluxes[static_cast<std::size_t>(i)] -
                                       base.fluxes[static_cast<std::size_t>(i)]) *
                                  grid.dx / probe);
    }
    flux_sensitivity = std::clamp(worst, 1e-3, 1.0);
  }
  report.flux_sensitivity = flux_sensitivity;
  const double dl_stable = grid.dx / (rays * std::max(zeta_bar, 1e-12) * flux_sensitivity);

  report.policy_iters_per_level.assign(static_cast<std::size_t>(nl) + 1, 0);
  for (int k = nl; k >= 1; --k) {
    const double l_here = grid.l_levels[static_cast<std::size_t>(k)];
    LevelSolve level = solve_level(data, grid, l_here, vertex, options, &warm);
    report.policy_iters_per_level[static_cast<std::size_t>(k)] = level.max_iters;
    if (k < nl) {
      sol.set_vertex(k, vertex);
      for (int i = 0; i < rays; ++i) {
        for (int j = 1; j <= grid.nx(); ++j) {
          sol.set(i, j, k, level.rays[static_cast<std::size_t>(i)]
                               .values[static_cast<std::size_t>(j)]);
        }
      }
    }
    // Explicit steps from l_k down to l_{k-1}, split when the grid spacing
    // exceeds the stability restriction.
    const int substeps = std::max(1, static_cast<int>(std::ceil(grid.dl / dl_stable)));
    report.total_substeps += substeps;
    const double sub_dl = grid.dl / substeps;
    for (int s = 0; s < substeps; ++s) {
      const double l_sub = l_here - s * sub_dl;
      if (s > 0) level = solve_level(data, grid, l_sub, vertex, options, &warm);
      vertex += sub_dl * kirchhoff_flux(data, l_sub, level.fluxes).value;
    }
  }
  // Bottom level.
  LevelSolve bottom = solve_level(data, grid, 0.0, vertex, options, &warm);
  report.policy_iters_per_level[0] = bottom.max_iters;
  sol.set_vertex(0, vertex);
  for (int i = 0; i < rays; ++i) {
    for (int j = 1; j <= grid.nx(); ++j) {
      sol.set(i, j, 0, bottom.rays[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(j)]);
    }
  }

  // Residual diagnostics on the stored field.
  for (int k = 0; k < nl; ++k) {
    for (int i = 0; i < rays; ++i) {
      for (int j = 1; j < grid.nx(); ++j) {
        report.max_interior_residual =
            std::max(report.max_interior_residual,
                     std::abs(discrete_residual(data, grid, sol, i, j, k, options)));
      }
    }
  }
  for (int k = 1; k <= nl; ++k) {
    const auto fluxes = stored_fluxes(sol, k, options);
    const double defect =
        (sol.vertex(k) - sol.vertex(k - 1)) / grid.dl +
        kirchhoff_flux(data, grid.l_levels[static_cast<std::size_t>(k)], fluxes).value;
    report.max_kirchhoff_residual = std::max(report.max_kirchhoff_residual, std::abs(defect));
  }

  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

ShiftResult shift_supersolution(const ProblemData& data, const Grid& grid,
                                const NetworkFunction& f, double c,
                                const SolverOptions& options) {
  if (c < 0.0) throw std::invalid_argument("shift_supersolution: c must be >= 0");
  ShiftResult out;
  out.shifted = f;
  out.shifted += c;
  double lowest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid.nl(); ++k) {
    for (int i = 0; i < f.ray_count(); ++i) {
      for (int j = 1; j < grid.nx(); ++j) {
        lowest = std::min(lowest, discrete_residual(data, grid, out.shifted, i, j, k, options));
      }
    }
  }
  out.min_interior_residual = lowest;
  return out;
}

NetworkFunction epsilon_scaling_transform(const NetworkFunction& f, double eps,
                                          int sign) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon_scaling_transform: eps must be > 0");
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("epsilon_scaling_transform: sign must be +1 or -1");
  }
  NetworkFunction out = f;
  const Grid& grid = f.grid();
  for (int k = 0; k <= grid.nl(); ++k) {
    const double term = sign * eps * std::exp(-eps * grid.l_levels[static_cast<std::size_t>(k)]);
    out.set_vertex(k, f.vertex(k) + term);
    for (int i = 0; i < f.ray_count(); ++i) {
      for (int j = 1; j <= grid.nx(); ++j) {
        out.set(i, j, k, f(i, j, k) + term);
      }
    }
  }
  return out;
}

namespace {

ProblemData with_boundary_offset(const ProblemData& data, double delta) {
  ProblemData shifted = data;
  for (std::size_t i = 0; i < shifted.lateral.size(); ++i) {
    shifted.lateral[i] = shifted.lateral[i].offset(delta);
    shifted.terminal[i] = shifted.terminal[i].offset(delta);
  }
  return shifted;
}

}  // namespace

ComparisonReport verify_comparison(const ProblemData& data, const Grid& grid,
                                   int trials, std::uint64_t seed,
                                   const SolverOptions& options, double delta,
                                   double ordering_tol) {
  if (trials < 1) throw std::invalid_argument("verify_comparison: trials must be >= 1");
  ComparisonReport report;
  RandomStream stream(mix_seed(seed, 0));
  for (int t = 0; t < trials; ++t) {
    ComparisonTrial trial;
    trial.delta = t == 0 ? delta : delta * (0.5 + stream.uniform());
    trial.shift = t == 0 ? 1.0 : 0.1 + stream.uniform();

    SolveReport base = march_local_time(data, grid, options);
    ShiftResult shifted = shift_supersolution(data, grid, base.solution, trial.shift, options);
    trial.shift_residual_defect =
        std::max(0.0, data.discount * trial.shift - options.tol * 10.0 -
                          shifted.min_interior_residual);

    SolveReport raised = march_local_time(with_boundary_offset(data, trial.delta), grid, options);
    SolveReport lowered = march_local_time(with_boundary_offset(data, -trial.delta), grid, options);

    auto pair_cmp = compare_pointwise(raised.solution, lowered.solution, ordering_tol);
    auto upper_cmp = compare_pointwise(raised.solution, base.solution, ordering_tol);
    auto lower_cmp = compare_pointwise(base.solution, lowered.solution, ordering_tol);
    trial.ordering_holds = pair_cmp.holds && upper_cmp.holds && lower_cmp.holds &&
                           trial.shift_residual_defect <= 0.0;
    trial.min_gap = pair_cmp.min_difference;
    trial.worst_location = pair_cmp.min_location;

    if (data.network.unbounded_local_time) {
      // Quadratic penalty in l localizes the supremum of (lowered - raised)
      // away from the truncation edge.
      const double alpha = 4.0 * trial.delta /
                           (data.network.local_time_bound * data.network.local_time_bound);
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < data.network.ray_count; ++i) {
        for (int k = 0; k <= grid.nl(); ++k) {
          const double l = grid.l_levels[static_cast<std::size_t>(k)];
          for (int j = 0; j <= grid.nx(); ++j) {
            const double v = lowered.solution(i, j, k) - raised.solution(i, j, k) -
                             alpha * l * l;
            if (v > best) {
              best = v;
              trial.penalty_argmax_l = l;
            }
          }
        }
      }
    }

    if (!trial.ordering_holds) ++report.failures;
    report.trials.push_back(trial);
  }
  return report;
}

StaticSolveResult solve_l_independent(const ProblemData& data, const Grid& grid,
                                      const std::vector<double>& eps_schedule,
                                      const SolverOptions& options,
                                      double l_variation_tol) {
  data.validate_structure();
  for (int i = 0; i < data.network.ray_count; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    if (data.sigma[s].uses_l() || data.drift[s].uses_l() || data.run_cost[s].uses_l() ||
        data.spin[s].uses_l() || data.lateral[s].uses_l()) {
      throw std::invalid_argument("solve_l_independent: coefficients depend on l");
    }
  }
  if (data.junction_cost.uses_l()) {
    throw std::invalid_argument("solve_l_independent: junction cost depends on l");
  }
  for (std::size_t j = 1; j < eps_schedule.size(); ++j) {
    if (!(eps_schedule[j] < eps_schedule[j - 1])) {
      throw std::invalid_argument("solve_l_independent: eps schedule must decrease");
    }
  }

  const double window = data.network.local_time_bound;
  const double length = data.network.ray_length;
  const int rays = data.network.ray_count;

  // Relaxation guess at the truncation edge: affine profiles joining a
  // common vertex value to the lateral data.
  std::vector<double> chi(static_cast<std::size_t>(rays));
  double chi_mean = 0.0;
  for (int i = 0; i < rays; ++i) {
    chi[static_cast<std::size_t>(i)] = data.lateral[static_cast<std::size_t>(i)].eval({});
    chi_mean += chi[static_cast<std::size_t>(i)] / rays;
  }

  auto wrapped_problem = [&](double eps) {
    ProblemData wrapped = data;
    const double edge = eps > 0.0 ? eps * std::exp(-eps * window) : 0.0;
    for (int i = 0; i < rays; ++i) {
      const std::size_t s = static_cast<std::size_t>(i);
      if (eps > 0.0) {
        wrapped.lateral[s] = CoefficientExpr::parse(
            "(" + data.lateral[s].source() + ") + " + format_full(eps) + "*exp(-" +
            format_full(eps) + "*l)");
      }
      const double far = chi[s] + edge;
      const double v0 = chi_mean + edge;
      wrapped.terminal[s] = CoefficientExpr::parse(
          format_full(v0) + " + " + format_full((far - v0) / length) + "*x");
    }
    return wrapped;
  };

  StaticSolveResult result;
  auto slice_of = [&](const NetworkFunction& f) {
    std::vector<std::vector<double>> slice(static_cast<std::size_t>(rays));
    for (int i = 0; i < rays; ++i) {
      auto& row = slice[static_cast<std::size_t>(i)];
      row.resize(static_cast<std::size_t>(grid.nx()) + 1);
      for (int j = 0; j <= grid.nx(); ++j) row[static_cast<std::size_t>(j)] = f(i, j, 0);
    }
    return slice;
  };
  auto sup_gap = [&](const std::vector<std::vector<double>>& a,
                     const std::vector<std::vector<double>>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < a[i].size(); ++j) {
        worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
      }
    }
    return worst;
  };

  for (double eps : eps_schedule) {
    if (!(eps > 0.0)) throw std::invalid_argument("solve_l_independent: eps must be > 0");
    SolveReport run = march_local_time(wrapped_problem(eps), grid, options);
    result.eps_used.push_back(eps);
    result.eps_slices.push_back(slice_of(run.solution));
    if (result.eps_slices.size() > 1) {
      result.cauchy_gaps.push_back(
          sup_gap(result.eps_slices[result.eps_slices.size() - 2], result.eps_slices.back()));
    }
  }

  // The eps -> 0 member of the family is solvable directly; it is the
  // extracted slice, and the schedule documents the convergence toward it.
  SolveReport limit_run = march_local_time(wrapped_problem(0.0), grid, options);
  result.slice = slice_of(limit_run.solution);
  double variation = 0.0;
  for (int i = 0; i < rays; ++i) {
    for (int j = 0; j <= grid.nx(); ++j) {
      variation = std::max(variation,
                           std::abs(limit_run.solution(i, j, 1) - limit_run.solution(i, j, 0)));
    }
  }
  result.l_variation = variation;

  if (result.eps_slices.size() >= 2) {
    // Richardson extrapolation through the last (up to three) schedule
    // slices, evaluated at eps = 0.
    const std::size_t n = std::min<std::size_t>(3, result.eps_slices.size());
    const std::size_t first = result.eps_slices.size() - n;
    std::vector<double> eps(n);
    for (std::size_t a = 0; a < n; ++a) eps[a] = result.eps_used[first + a];
    double worst = 0.0;
    for (int i = 0; i < rays; ++i) {
      for (int j = 0; j <= grid.nx(); ++j) {
        double extrap = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
          double weight = 1.0;
          for (std::size_t b = 0; b < n; ++b) {
            if (b != a) weight *= (0.0 - eps[b]) / (eps[a] - eps[b]);
          }
          extrap += weight *
                    result.eps_slices[first + a][static_cast<std::size_t>(i)]
                                     [static_cast<std::size_t>(j)];
        }
        worst = std::max(worst, std::abs(extrap - result.slice[static_cast<std::size_t>(i)]
                                                              [static_cast<std::size_t>(j)]));
      }
    }
    result.extrapolation_gap = worst;
  }

  if (result.l_variation > l_variation_tol) {
    throw VerificationError(
        "solve_l_independent: extracted slice is not l-invariant; enlarge the "
        "truncation window");
  }
  return result;
}

}  // namespace spider
