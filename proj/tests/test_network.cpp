#include <doctest.h>

#include <stdexcept>

#include "spider/network.hpp"

using namespace spider;

TEST_SUITE_BEGIN("network");

TEST_CASE("build_grid produces uniform partitions with exact endpoints") {
  Network net{2, 1.0, 1.0};
  Grid g = build_grid(net, 4, 2);
  CHECK(g.x_nodes == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(g.l_levels == std::vector<double>{0.0, 0.5, 1.0});

  Grid g2 = build_grid(Network{2, 2.0, 1.0}, 2, 1);
  CHECK(g2.x_nodes == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(g2.l_levels == std::vector<double>{0.0, 1.0});
}

TEST_CASE("grid endpoints are bit-exact even for awkward lengths") {
  for (int nx : {3, 7, 100, 333}) {
    Grid g = build_grid(Network{3, 0.7, 0.3}, nx, 5);
    CHECK(g.x_nodes.front() == 0.0);
    CHECK(g.x_nodes.back() == 0.7);
    CHECK(g.l_levels.front() == 0.0);
    CHECK(g.l_levels.back() == 0.3);
    for (std::size_t j = 1; j < g.x_nodes.size(); ++j) {
      CHECK(g.x_nodes[j] > g.x_nodes[j - 1]);
    }
  }
}

TEST_CASE("build_grid rejects degenerate inputs") {
  Network net{2, 1.0, 1.0};
  CHECK_THROWS_AS(build_grid(net, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(net, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(net, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Network{1, 1.0, 1.0}, 4, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Network{2, -1.0, 1.0}, 4, 2), std::invalid_argument);
}

TEST_CASE("vertex writes mirror into ray node 0") {
  Grid g = build_grid(Network{3, 1.0, 1.0}, 4, 2);
  NetworkFunction f(g);
  f.set_vertex(1, 2.5);
  for (int i = 0; i < 3; ++i) CHECK(f(i, 0, 1) == 2.5);
  CHECK(continuity_residual(f) == 0.0);
}

TEST_CASE("continuity residual measures vertex mismatch") {
  Grid g = build_grid(Network{2, 1.0, 1.0}, 4, 2);
  NetworkFunction f(g, 1.0);
  for (int k = 0; k <= 2; ++k) f.set_vertex(k, 1.0);
  CHECK(continuity_residual(f) == 0.0);

  f.set(1, 0, 0, 1.5);
  CHECK(continuity_residual(f) == doctest::Approx(0.5));

  f.set(0, 0, 1, 1.2);
  f.set(1, 0, 2, 1.7);
  CHECK(continuity_residual(f) == doctest::Approx(0.7));
}

TEST_CASE("compare_pointwise identity, shift, and violation") {
  Grid g = build_grid(Network{2, 1.0, 1.0}, 4, 2);
  NetworkFunction u(g, 1.0), v(g, 1.0);

  auto same = compare_pointwise(u, v);
  CHECK(same.min_difference == 0.0);
  CHECK(same.holds);

  NetworkFunction w = v;
  w += 1.0;
  auto shifted = compare_pointwise(w, v);
  CHECK(shifted.min_difference == 1.0);
  CHECK(shifted.holds);

  NetworkFunction broken = v;
  broken.set(1, 2, 1, v(1, 2, 1) - 0.1);
  auto bad = compare_pointwise(broken, v);
  CHECK(bad.min_difference == doctest::Approx(-0.1));
  CHECK_FALSE(bad.holds);
  CHECK(bad.min_location.ray == 1);
  CHECK(bad.min_location.x_index == 2);
  CHECK(bad.min_location.l_index == 1);
}

TEST_CASE("compare_pointwise is antisymmetric in sign") {
  Grid g = build_grid(Network{2, 1.0, 1.0}, 8, 4);
  NetworkFunction u(g), v(g);
  // Deterministic pseudo-random fill.
  unsigned state = 12345;
  auto next = [&]() {
    state = state * 1664525u + 1013904223u;
    return (state >> 8) * (1.0 / 16777216.0) - 0.5;
  };
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k <= 4; ++k) {
      for (int j = 0; j <= 8; ++j) {
        u.set(i, j, k, next());
        v.set(i, j, k, next());
      }
    }
  }
  auto uv = compare_pointwise(u, v);
  auto vu = compare_pointwise(v, u);
  CHECK(uv.min_difference == -vu.max_difference);
  CHECK(uv.max_difference == -vu.min_difference);
}

TEST_CASE("compare_pointwise rejects mismatched grids") {
  NetworkFunction u(build_grid(Network{2, 1.0, 1.0}, 4, 2));
  NetworkFunction v(build_grid(Network{2, 1.0, 1.0}, 8, 2));
  CHECK_THROWS_AS(compare_pointwise(u, v), std::invalid_argument);
}

TEST_SUITE_END();
