#include "spider/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spider/numerics.hpp"

namespace spider {

SpiderDynamics reflected_brownian_motion(int rays) {
  SpiderDynamics dyn;
  dyn.ray_count = rays;
  dyn.diffusion = [](int, double, double) { return 0.5; };  // unit SDE volatility
  dyn.drift = [](int, double, double) { return 0.0; };
  dyn.spin = [rays](int, double) { return 1.0 / rays; };
  return dyn;
}

namespace {

struct StepState {
  double t = 0.0;
  double x = 0.0;
  double local_time = 0.0;
  int ray = 0;
};

struct StepOutcome {
  bool reflected = false;
  double dl = 0.0;
  double x_free = 0.0;  // proposed endpoint before any reflection
};

void check_dynamics(const SpiderDynamics& dynamics, const SimParams& params) {
  if (dynamics.ray_count < 1) throw std::invalid_argument("simulate: ray_count must be >= 1");
  if (!(params.dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
  if (!(params.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");
  if (params.x0 < 0.0) throw std::invalid_argument("simulate: x0 must be >= 0");
  if (params.ray0 < 0 || params.ray0 >= dynamics.ray_count) {
    throw std::invalid_argument("simulate: ray0 out of range");
  }
  double total = 0.0;
  for (int i = 0; i < dynamics.ray_count; ++i) total += dynamics.spin(i, params.l0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("simulate: spin weights not normalized");
  }
}

int sample_ray(const SpiderDynamics& dynamics, double l, double u) {
  double acc = 0.0;
  for (int i = 0; i < dynamics.ray_count; ++i) {
    acc += dynamics.spin(i, l);
    if (u <= acc) return i;
  }
  return dynamics.ray_count - 1;
}

// One Euler step with reflection at the vertex. Advances `s` in place.
StepOutcome advance(const SpiderDynamics& dynamics, const SimParams& params,
                    StepState& s, RandomStream& rng) {
  const double a = dynamics.diffusion(s.ray, s.x, s.local_time);
  if (!(a > 0.0)) throw std::runtime_error("simulate: diffusion coefficient <= 0");
  const double vol = std::sqrt(2.0 * a);
  const double b = dynamics.drift(s.ray, s.x, s.local_time);
  const double x_free = s.x + b * params.dt + vol * std::sqrt(params.dt) * rng.normal();

  StepOutcome out;
  out.x_free = x_free;
  if (params.scheme == ReflectionScheme::kMirror) {
    if (x_free < 0.0) {
      out.reflected = true;
      out.dl = 2.0 * (-x_free);
      s.x = -x_free;
    } else {
      s.x = x_free;
    }
  } else {
    // Exact-in-law bridge minimum of the free step.
    const double span = x_free - s.x;
    const double m =
        0.5 * (s.x + x_free -
               std::sqrt(span * span - 2.0 * vol * vol * params.dt * std::log(rng.uniform())));
    if (m < 0.0) {
      out.reflected = true;
      out.dl = -m;
      s.x = x_free + out.dl;
    } else {
      s.x = x_free;
    }
  }
  s.t += params.dt;
  if (out.reflected) {
    s.local_time += out.dl;
    s.ray = sample_ray(dynamics, s.local_time, rng.uniform());
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

EstimatorReport report_from(const std::vector<double>& per_path) {
  EstimatorReport rep;
  rep.paths = static_cast<int>(per_path.size());
  if (per_path.size() < 2) throw std::invalid_argument("estimator needs at least 2 paths");
  rep.estimate = mean_of(per_path);
  double ss = 0.0;
  for (double x : per_path) ss += (x - rep.estimate) * (x - rep.estimate);
  rep.std_error = std::sqrt(ss / (static_cast<double>(per_path.size()) - 1.0) /
                            static_cast<double>(per_path.size()));
  return rep;
}

// Runs `paths` independent trajectories and stores fn(path_index) results in
// index order; deterministic for any thread count.
std::vector<double> per_path_values(int paths, int threads,
                                    const std::function<double(std::uint64_t)>& fn) {
  if (paths < 2) throw std::invalid_argument("estimator needs at least 2 paths");
  std::vector<double> out(static_cast<std::size_t>(paths));
  parallel_for(static_cast<std::size_t>(paths),
               [&](std::size_t p) { out[p] = fn(static_cast<std::uint64_t>(p)); }, threads);
  return out;
}

}  // namespace

SpiderPath simulate_path(const SpiderDynamics& dynamics, const SimParams& params) {
  check_dynamics(dynamics, params);
  const std::size_t steps = static_cast<std::size_t>(std::llround(params.horizon / params.dt));
  SpiderPath path;
  path.dt = params.dt;
  path.t.reserve(steps + 1);
  path.x.reserve(steps + 1);
  path.local_time.reserve(steps + 1);
  path.ray.reserve(steps + 1);
  path.reflected.reserve(steps);

  RandomStream rng(params.seed);
  StepState s{0.0, params.x0, params.l0, params.ray0};
  path.t.push_back(s.t);
  path.x.push_back(s.x);
  path.local_time.push_back(s.local_time);
  path.ray.push_back(s.ray);
  for (std::size_t n = 0; n < steps; ++n) {
    const StepOutcome out = advance(dynamics, params, s, rng);
    path.t.push_back(s.t);
    path.x.push_back(s.x);
    path.local_time.push_back(s.local_time);
    path.ray.push_back(s.ray);
    path.reflected.push_back(out.reflected ? 1 : 0);
  }
  return path;
}

namespace {

// Completed vertex-to-eps excursion counter, shared by the recorded-path and
// streaming estimators.
struct DowncrossCounter {
  bool seeking_top = true;
  std::size_t count = 0;

  void init(double x0, double eps) { seeking_top = x0 < eps; }
  void observe(double x_new, bool reflected, double eps) {
    if (seeking_top) {
      if (x_new >= eps) seeking_top = false;
    } else if (reflected) {
      ++count;
      seeking_top = true;
    }
  }
};

}  // namespace

double downcrossing_local_time(const SpiderPath& path, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("downcrossing_local_time: eps must be > 0");
  if (path.x.empty()) return 0.0;
  DowncrossCounter counter;
  counter.init(path.x.front(), eps);
  for (std::size_t n = 1; n < path.x.size(); ++n) {
    counter.observe(path.x[n], path.reflected[n - 1] != 0, eps);
  }
  return eps * static_cast<double>(counter.count);
}

EstimatorReport downcrossing_deviation(const SpiderDynamics& dynamics,
                                       const SimParams& params, int paths, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("downcrossing_deviation: eps must be > 0");
  check_dynamics(dynamics, params);
  auto values = per_path_values(paths, params.threads, [&](std::uint64_t p) {
    RandomStream rng(mix_seed(params.seed, p));
    StepState s{0.0, params.x0, params.l0, params.ray0};
    DowncrossCounter counter;
    counter.init(s.x, eps);
    while (s.t < params.horizon - 0.5 * params.dt) {
      const StepOutcome out = advance(dynamics, params, s, rng);
      counter.observe(s.x, out.reflected, eps);
    }
    return std::abs(eps * static_cast<double>(counter.count) -
                    (s.local_time - params.l0));
  });
  return report_from(values);
}

EstimatorReport local_time_at_horizon(const SpiderDynamics& dynamics,
                                      const SimParams& params, int paths) {
  check_dynamics(dynamics, params);
  auto values = per_path_values(paths, params.threads, [&](std::uint64_t p) {
    RandomStream rng(mix_seed(params.seed, p));
    StepState s{0.0, params.x0, params.l0, params.ray0};
    while (s.t < params.horizon - 0.5 * params.dt) advance(dynamics, params, s, rng);
    return s.local_time;
  });
  return report_from(values);
}

EstimatorReport occupation_identity_check(const SpiderDynamics& dynamics,
                                          const SimParams& params, int paths,
                                          double eps, double t) {
  check_dynamics(dynamics, params);
  double constant = 0.0;
  for (int i = 0; i < dynamics.ray_count; ++i) {
    const double sigma_sq = 2.0 * dynamics.diffusion(i, 0.0, params.l0);
    constant += dynamics.spin(i, params.l0) / sigma_sq;
  }
  auto values = per_path_values(paths, params.threads, [&](std::uint64_t p) {
    RandomStream rng(mix_seed(params.seed, p));
    StepState s{0.0, params.x0, params.l0, params.ray0};
    double occupation = 0.0;
    while (s.t < t - 0.5 * params.dt) {
      if (s.x >= 0.0 && s.x <= eps) occupation += params.dt;
      advance(dynamics, params, s, rng);
    }
    return std::abs(occupation / (2.0 * eps) - constant * (s.local_time - params.l0));
  });
  return report_from(values);
}

EstimatorReport non_stickiness_check(const SpiderDynamics& dynamics,
                                     const SimParams& params, int paths, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("non_stickiness_check: delta must be > 0");
  check_dynamics(dynamics, params);
  auto values = per_path_values(paths, params.threads, [&](std::uint64_t p) {
    RandomStream rng(mix_seed(params.seed, p));
    StepState s{0.0, params.x0, params.l0, params.ray0};
    double below = 0.0;
    while (s.t < params.horizon - 0.5 * params.dt) {
      if (s.x < delta) below += params.dt;
      advance(dynamics, params, s, rng);
    }
    return below / params.horizon;
  });
  return report_from(values);
}

std::vector<double> spin_frequencies(const SpiderDynamics& dynamics,
                                     const SimParams& params, int paths,
                                     std::uint64_t* events_out) {
  check_dynamics(dynamics, params);
  std::vector<std::vector<double>> counts(
      static_cast<std::size_t>(paths),
      std::vector<double>(static_cast<std::size_t>(dynamics.ray_count), 0.0));
  parallel_for(
      static_cast<std::size_t>(paths),
      [&](std::size_t p) {
        RandomStream rng(mix_seed(params.seed, p));
        StepState s{0.0, params.x0, params.l0, params.ray0};
        while (s.t < params.horizon - 0.5 * params.dt) {
          if (advance(dynamics, params, s, rng).reflected) {
            counts[p][static_cast<std::size_t>(s.ray)] += 1.0;
          }
        }
      },
      params.threads);
  std::vector<double> total(static_cast<std::size_t>(dynamics.ray_count), 0.0);
  double events = 0.0;
  for (const auto& row : counts) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      total[i] += row[i];
      events += row[i];
    }
  }
  if (events_out) *events_out = static_cast<std::uint64_t>(events);
  if (events > 0.0) {
    for (double& v : total) v /= events;
  }
  return total;
}

std::vector<double> ray_occupation(const SpiderDynamics& dynamics,
                                   const SimParams& params, int paths) {
  check_dynamics(dynamics, params);
  std::vector<std::vector<double>> shares(
      static_cast<std::size_t>(paths),
      std::vector<double>(static_cast<std::size_t>(dynamics.ray_count), 0.0));
  parallel_for(
      static_cast<std::size_t>(paths),
      [&](std::size_t p) {
        RandomStream rng(mix_seed(params.seed, p));
        StepState s{0.0, params.x0, params.l0, params.ray0};
        double steps = 0.0;
        while (s.t < params.horizon - 0.5 * params.dt) {
          shares[p][static_cast<std::size_t>(s.ray)] += 1.0;
          steps += 1.0;
          advance(dynamics, params, s, rng);
        }
        for (double& v : shares[p]) v /= steps;
      },
      params.threads);
  std::vector<double> mean(static_cast<std::size_t>(dynamics.ray_count), 0.0);
  for (const auto& row : shares) {
    for (std::size_t i = 0; i < row.size(); ++i) mean[i] += row[i] / paths;
  }
  return mean;
}

EstimatorReport estimate_value(const SpiderDynamics& dynamics, const SimParams& params,
                               int paths, const ValueProblem& problem) {
  check_dynamics(dynamics, params);
  if (!(problem.discount > 0.0)) {
    throw std::invalid_argument("estimate_value: discount must be > 0");
  }
  if (!(problem.tail > 0.0) || problem.tail >= 1.0) {
    throw std::invalid_argument("estimate_value: tail must be in (0, 1)");
  }
  const double horizon = -std::log(problem.tail) / problem.discount;
  const double decay = std::exp(-problem.discount * params.dt);
  auto values = per_path_values(paths, params.threads, [&](std::uint64_t p) {
    RandomStream rng(mix_seed(params.seed, p));
    StepState s{0.0, params.x0, params.l0, params.ray0};
    double value = 0.0;
    double weight = 1.0;
    while (s.t < horizon - 0.5 * params.dt) {
      const double cost = problem.running_cost(s.ray, s.x, s.local_time);
      if (!std::isfinite(cost)) throw std::runtime_error("estimate_value: unbounded cost");
      value += weight * cost * params.dt;

      const double x_prev = s.x;
      const int ray_prev = s.ray;
      const StepOutcome out = advance(dynamics, params, s, rng);
      const double weight_end = weight * decay;
      weight = weight_end;

      if (out.reflected) {
        // Cost accrues only up to the exit level when the increment crosses it.
        const double l_before = s.local_time - out.dl;
        double dl_effective = out.dl;
        if (problem.exit_enabled && s.local_time >= problem.l_exit) {
          dl_effective = std::max(0.0, problem.l_exit - l_before);
        }
        value += weight_end * problem.junction_cost(l_before) * dl_effective;
        if (problem.exit_enabled && s.local_time >= problem.l_exit) {
          value += weight_end * problem.l_exit_payoff(ray_prev, s.x);
          return value;
        }
      } else if (problem.exit_enabled) {
        if (s.x >= problem.x_exit) {
          value += weight_end * problem.x_exit_payoff(ray_prev, s.local_time);
          return value;
        }
        // Brownian-bridge crossing test against the far boundary removes the
        // half-order discretization bias of the plain first-passage check.
        const double a = dynamics.diffusion(ray_prev, x_prev, s.local_time);
        const double gap_old = problem.x_exit - x_prev;
        const double gap_new = problem.x_exit - s.x;
        const double cross =
            std::exp(-gap_old * gap_new / (a * params.dt));
        if (rng.uniform() < cross) {
          value += weight_end * problem.x_exit_payoff(ray_prev, s.local_time);
          return value;
        }
      }
    }
    return value;
  });
  return report_from(values);
}

}  // namespace spider
