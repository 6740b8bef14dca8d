#pragma once

#include <cstddef>
#include <vector>

namespace spider {

// Star-shaped network: `ray_count` copies of [0, ray_length] glued at a
// single vertex, with the local-time variable living on [0, local_time_bound].
// `unbounded_local_time` marks local_time_bound as a truncation window rather
// than a hard domain boundary.
struct Network {
  int ray_count = 2;
  double ray_length = 1.0;
  double local_time_bound = 1.0;
  bool unbounded_local_time = false;

  void validate() const;
};

bool operator==(const Network& a, const Network& b);

// Uniform tensor grid on [0, R] x [0, K]. Endpoints are exact.
struct Grid {
  Network network;
  std::vector<double> x_nodes;   // size nx + 1
  std::vector<double> l_levels;  // size nl + 1
  double dx = 0.0;
  double dl = 0.0;

  int nx() const { return static_cast<int>(x_nodes.size()) - 1; }
  int nl() const { return static_cast<int>(l_levels.size()) - 1; }
};

bool operator==(const Grid& a, const Grid& b);

Grid build_grid(const Network& network, int nx, int nl);

// Scalar field u_i(x_j, l_k) on a grid. The vertex value u(0, l_k) is stored
// once per level and mirrored into every ray's node 0, so continuity at the
// vertex is structural. Direct writes through set() can still break it, which
// is what continuity_residual measures.
class NetworkFunction {
 public:
  NetworkFunction() = default;
  explicit NetworkFunction(const Grid& grid, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  int ray_count() const { return grid_.network.ray_count; }

  double operator()(int ray, int xi, int li) const {
    return values_[index(ray, xi, li)];
  }
  double vertex(int li) const { return vertex_values_[static_cast<std::size_t>(li)]; }

  void set(int ray, int xi, int li, double v) { values_[index(ray, xi, li)] = v; }
  // Writes the shared vertex value and mirrors it into node 0 of every ray.
  void set_vertex(int li, double v);

  const std::vector<double>& raw_values() const { return values_; }
  const std::vector<double>& vertex_values() const { return vertex_values_; }

  NetworkFunction& operator+=(double c);

 private:
  std::size_t index(int ray, int xi, int li) const;

  Grid grid_;
  std::vector<double> values_;         // layout [ray][li][xi]
  std::vector<double> vertex_values_;  // size nl + 1
};

// max_{i,k} |u_i(0, l_k) - u(0, l_k)|; zero when vertex continuity holds.
double continuity_residual(const NetworkFunction& f);

struct GridLocation {
  int ray = 0;
  int x_index = 0;
  int l_index = 0;
};

struct OrderingReport {
  double min_difference = 0.0;  // min over all nodes of u - v
  double max_difference = 0.0;
  GridLocation min_location;
  bool holds = false;  // min_difference >= -tolerance
};

// Node-wise comparison of two fields on the same grid. Throws on grid mismatch.
OrderingReport compare_pointwise(const NetworkFunction& u, const NetworkFunction& v,
                                 double tolerance = 0.0);

}  // namespace spider
