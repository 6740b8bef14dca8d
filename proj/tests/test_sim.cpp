#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "spider/sim.hpp"

using namespace spider;

namespace {

const double kRootTwoOverPi = 0.79788456080286536;

}  // namespace

TEST_SUITE_BEGIN("sim");

TEST_CASE("paths are nonnegative with nondecreasing local time") {
  auto dyn = reflected_brownian_motion(2);
  SimParams p;
  p.dt = 1e-3;
  p.seed = 5;
  auto path = simulate_path(dyn, p);
  REQUIRE(path.x.size() == 1001);
  for (std::size_t n = 1; n < path.x.size(); ++n) {
    CHECK(path.x[n] >= 0.0);
    CHECK(path.local_time[n] >= path.local_time[n - 1]);
    // Local time moves only on reflection steps.
    if (path.local_time[n] > path.local_time[n - 1]) CHECK(path.reflected[n - 1] == 1);
    if (!path.reflected[n - 1]) {
      CHECK(path.local_time[n] == path.local_time[n - 1]);
      CHECK(path.ray[n] == path.ray[n - 1]);
    }
  }
}

TEST_CASE("fixed seed reproduces the path bit for bit") {
  auto dyn = reflected_brownian_motion(3);
  SimParams p;
  p.dt = 1e-3;
  p.seed = 77;
  auto a = simulate_path(dyn, p);
  auto b = simulate_path(dyn, p);
  CHECK(a.x == b.x);
  CHECK(a.local_time == b.local_time);
  CHECK(a.ray == b.ray);
}

TEST_CASE("ensemble reductions are independent of thread count") {
  auto dyn = reflected_brownian_motion(1);
  SimParams p1;
  p1.dt = 2e-3;
  p1.seed = 11;
  p1.threads = 1;
  SimParams p4 = p1;
  p4.threads = 4;
  auto a = local_time_at_horizon(dyn, p1, 500);
  auto b = local_time_at_horizon(dyn, p4, 500);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("reflected Brownian local time matches the closed form") {
  auto dyn = reflected_brownian_motion(1);
  SimParams p;
  p.dt = 5e-4;
  p.seed = 314;
  auto rep = local_time_at_horizon(dyn, p, 20000);
  CHECK(std::abs(rep.estimate - kRootTwoOverPi) < 3.5 * rep.std_error + 0.005);

  SimParams pb = p;
  pb.scheme = ReflectionScheme::kBridge;
  auto repb = local_time_at_horizon(dyn, pb, 20000);
  CHECK(std::abs(repb.estimate - kRootTwoOverPi) < 3.5 * repb.std_error + 0.005);
}

TEST_CASE("two symmetric rays are visited evenly") {
  auto dyn = reflected_brownian_motion(2);
  SimParams p;
  p.dt = 1e-3;
  p.seed = 21;
  auto shares = ray_occupation(dyn, p, 4000);
  REQUIRE(shares.size() == 2);
  CHECK(shares[0] == doctest::Approx(0.5).epsilon(0.03));
  CHECK(shares[0] + shares[1] == doctest::Approx(1.0));
}

TEST_CASE("spin frequencies follow the spinning measure") {
  SpiderDynamics dyn = reflected_brownian_motion(2);
  dyn.spin = [](int ray, double) { return ray == 0 ? 0.3 : 0.7; };
  SimParams p;
  p.dt = 1e-3;
  p.seed = 8;
  std::uint64_t events = 0;
  auto freq = spin_frequencies(dyn, p, 2000, &events);
  REQUIRE(events > 1000);
  const double se = std::sqrt(0.3 * 0.7 / static_cast<double>(events));
  CHECK(std::abs(freq[0] - 0.3) < 5.0 * se);
}

TEST_CASE("unnormalized spin weights are rejected") {
  SpiderDynamics dyn = reflected_brownian_motion(2);
  dyn.spin = [](int, double) { return 0.4; };
  SimParams p;
  CHECK_THROWS_AS(simulate_path(dyn, p), std::invalid_argument);
  SimParams bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(simulate_path(reflected_brownian_motion(1), bad),
                  std::invalid_argument);
}

TEST_CASE("downcrossing count on hand-built paths") {
  SpiderPath path;
  path.dt = 1.0;
  // 0 -> above eps -> reflected at vertex -> above eps -> reflected: 2 passes.
  path.x = {0.0, 0.3, 0.05, 0.02, 0.35, 0.01};
  path.reflected = {0, 0, 1, 0, 1};
  path.local_time = {0, 0, 0.1, 0.1, 0.1, 0.2};
  path.ray = {0, 0, 0, 0, 0, 0};
  CHECK(downcrossing_local_time(path, 0.2) == doctest::Approx(0.4));
  // Path that never reaches eps counts nothing.
  SpiderPath low;
  low.x = {0.0, 0.05, 0.01, 0.04};
  low.reflected = {0, 1, 0};
  CHECK(downcrossing_local_time(low, 0.2) == 0.0);
}

TEST_CASE("downcrossing deviation shrinks along the eps schedule") {
  auto dyn = reflected_brownian_motion(1);
  SimParams p;
  p.dt = 1e-4;
  p.seed = 500;
  double prev = 1e300;
  for (double eps : {0.2, 0.1, 0.05}) {
    auto rep = downcrossing_deviation(dyn, p, 400, eps);
    CHECK(rep.estimate < prev);
    prev = rep.estimate;
  }
}

TEST_CASE("downcrossing estimator is ray agnostic") {
  SimParams p;
  p.dt = 1e-4;
  p.seed = 640;
  auto one = downcrossing_deviation(reflected_brownian_motion(1), p, 300, 0.1);
  auto three = downcrossing_deviation(reflected_brownian_motion(3), p, 300, 0.1);
  // Same radial law, same estimator behavior.
  CHECK(std::abs(one.estimate - three.estimate) <
        4.0 * (one.std_error + three.std_error) + 0.01);
}

TEST_CASE("occupation identity tightens along the eps schedule") {
  auto dyn = reflected_brownian_motion(1);
  SimParams p;
  p.dt = 1e-4;
  p.seed = 73;
  double prev = 1e300;
  for (double eps : {0.2, 0.1, 0.05}) {
    auto rep = occupation_identity_check(dyn, p, 400, eps, 1.0);
    CHECK(rep.estimate < prev);
    prev = rep.estimate;
  }
}

TEST_CASE("occupation identity constant uses the squared volatilities") {
  // sigma_1(0) = 2, sigma_2(0) = 1, alpha = (1/2, 1/2): constant 0.625.
  SpiderDynamics dyn;
  dyn.ray_count = 2;
  dyn.diffusion = [](int ray, double, double) { return ray == 0 ? 2.0 : 0.5; };
  dyn.drift = [](int, double, double) { return 0.0; };
  dyn.spin = [](int, double) { return 0.5; };
  const double constant = 0.5 / 4.0 + 0.5 / 1.0;
  CHECK(constant == doctest::Approx(0.625));
  SimParams p;
  p.dt = 1e-4;
  p.seed = 99;
  auto rep = occupation_identity_check(dyn, p, 200, 0.05, 0.5);
  CHECK(rep.estimate < 0.2);  // discrepancy small at fine dt and eps
}

TEST_CASE("non-stickiness fraction shrinks with the band") {
  auto dyn = reflected_brownian_motion(1);
  SimParams p;
  p.dt = 1e-3;
  p.seed = 17;
  double prev = 1e300;
  for (double delta : {0.2, 0.1, 0.05}) {
    auto rep = non_stickiness_check(dyn, p, 500, delta);
    CHECK(rep.estimate < prev);
    prev = rep.estimate;
  }
  // A band larger than the whole excursion range traps everything.
  SpiderDynamics slow = reflected_brownian_motion(1);
  slow.diffusion = [](int, double, double) { return 1e-8; };
  auto all = non_stickiness_check(slow, p, 10, 10.0);
  CHECK(all.estimate == doctest::Approx(1.0));
  // Strong outward drift leaves the band almost immediately.
  SpiderDynamics out = reflected_brownian_motion(1);
  out.drift = [](int, double, double) { return 5.0; };
  out.diffusion = [](int, double, double) { return 1e-4; };
  auto gone = non_stickiness_check(out, p, 50, 0.05);
  CHECK(gone.estimate < 0.05);
}

TEST_CASE("step refinement keeps smooth statistics consistent") {
  // E[x(1)] for the reflected path equals E[l(1)] plus the martingale part:
  // both dt runs must agree with sqrt(2/pi) and with each other.
  auto dyn = reflected_brownian_motion(1);
  SimParams coarse;
  coarse.dt = 1e-3;
  coarse.seed = 808;
  SimParams fine = coarse;
  fine.dt = 2.5e-4;
  auto mean_position = [&](const SimParams& p) {
    // 4000 paths give SE ~ 0.01.
    double sum = 0.0, sumsq = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
      SimParams q = p;
      q.seed = p.seed * 1000003ULL + static_cast<std::uint64_t>(i);
      auto path = simulate_path(dyn, q);
      const double v = path.x.back();
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1.0));
    return std::make_pair(mean, se);
  };
  auto [mc, sec] = mean_position(coarse);
  auto [mf, sef] = mean_position(fine);
  CHECK(std::abs(mc - kRootTwoOverPi) < 4.0 * sec + 0.01);
  CHECK(std::abs(mf - kRootTwoOverPi) < 4.0 * sef + 0.01);
  CHECK(std::abs(mc - mf) < 4.0 * (sec + sef) + 0.01);
}

TEST_CASE("constant running cost integrates to c over lambda") {
  auto dyn = reflected_brownian_motion(1);
  SimParams p;
  p.dt = 1e-3;
  p.seed = 404;
  ValueProblem vp;
  vp.discount = 2.0;
  vp.running_cost = [](int, double, double) { return 3.0; };
  vp.junction_cost = [](double) { return 0.0; };
  auto rep = estimate_value(dyn, p, 100, vp);
  // Deterministic integrand: the left Riemann sum of 3 e^{-2t} dt.
  CHECK(rep.estimate == doctest::Approx(1.5).epsilon(2e-3));
  CHECK(rep.std_error < 1e-12);

  vp.running_cost = [](int, double, double) { return 0.0; };
  auto zero = estimate_value(dyn, p, 100, vp);
  CHECK(zero.estimate == 0.0);
}

TEST_CASE("value estimate is linear in the costs for a fixed ensemble") {
  auto dyn = reflected_brownian_motion(2);
  SimParams p;
  p.dt = 1e-3;
  p.seed = 31;
  ValueProblem vp;
  vp.discount = 1.0;
  vp.running_cost = [](int ray, double x, double) { return ray == 0 ? x : 0.5 * x; };
  vp.junction_cost = [](double l) { return 1.0 + l; };
  auto base = estimate_value(dyn, p, 300, vp);
  ValueProblem doubled = vp;
  doubled.running_cost = [](int ray, double x, double) { return 2.0 * (ray == 0 ? x : 0.5 * x); };
  doubled.junction_cost = [](double l) { return 2.0 * (1.0 + l); };
  auto twice = estimate_value(dyn, p, 300, doubled);
  CHECK(twice.estimate == doctest::Approx(2.0 * base.estimate).epsilon(1e-12));
}

TEST_SUITE_END();
