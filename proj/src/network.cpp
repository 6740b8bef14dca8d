#include "spider/network.hpp"

#include <cmath>
#include <stdexcept>

namespace spider {

void Network::validate() const {
  if (ray_count < 2) throw std::invalid_argument("Network: ray_count must be >= 2");
  if (!(ray_length > 0.0)) throw std::invalid_argument("Network: ray_length must be > 0");
  if (!(local_time_bound > 0.0)) {
    throw std::invalid_argument("Network: local_time_bound must be > 0");
  }
}

bool operator==(const Network& a, const Network& b) {
  return a.ray_count == b.ray_count && a.ray_length == b.ray_length &&
         a.local_time_bound == b.local_time_bound &&
         a.unbounded_local_time == b.unbounded_local_time;
}

bool operator==(const Grid& a, const Grid& b) {
  return a.network == b.network && a.x_nodes == b.x_nodes && a.l_levels == b.l_levels;
}

Grid build_grid(const Network& network, int nx, int nl) {
  network.validate();
  if (nx < 2) throw std::invalid_argument("build_grid: nx must be >= 2");
  if (nl < 1) throw std::invalid_argument("build_grid: nl must be >= 1");
  Grid grid;
  grid.network = network;
  grid.x_nodes.resize(static_cast<std::size_t>(nx) + 1);
  grid.l_levels.resize(static_cast<std::size_t>(nl) + 1);
  for (int j = 0; j <= nx; ++j) {
    grid.x_nodes[static_cast<std::size_t>(j)] = network.ray_length * j / nx;
  }
  grid.x_nodes.front() = 0.0;
  grid.x_nodes.back() = network.ray_length;
  for (int k = 0; k <= nl; ++k) {
    grid.l_levels[static_cast<std::size_t>(k)] = network.local_time_bound * k / nl;
  }
  grid.l_levels.front() = 0.0;
  grid.l_levels.back() = network.local_time_bound;
  grid.dx = network.ray_length / nx;
  grid.dl = network.local_time_bound / nl;
  return grid;
}

NetworkFunction::NetworkFunction(const Grid& grid, double fill) : grid_(grid) {
  const std::size_t per_ray =
      grid_.x_nodes.size() * grid_.l_levels.size();
  values_.assign(per_ray * static_cast<std::size_t>(grid_.network.ray_count), fill);
  vertex_values_.assign(grid_.l_levels.size(), fill);
}

std::size_t NetworkFunction::index(int ray, int xi, int li) const {
  const std::size_t nxn = grid_.x_nodes.size();
  const std::size_t nln = grid_.l_levels.size();
  return (static_cast<std::size_t>(ray) * nln + static_cast<std::size_t>(li)) * nxn +
         static_cast<std::size_t>(xi);
}

void NetworkFunction::set_vertex(int li, double v) {
  vertex_values_[static_cast<std::size_t>(li)] = v;
  for (int i = 0; i < grid_.network.ray_count; ++i) {
    values_[index(i, 0, li)] = v;
  }
}

NetworkFunction& NetworkFunction::operator+=(double c) {
  for (double& v : values_) v += c;
  for (double& v : vertex_values_) v += c;
  return *this;
}

double continuity_residual(const NetworkFunction& f) {
  double worst = 0.0;
  const Grid& grid = f.grid();
  for (int i = 0; i < f.ray_count(); ++i) {
    for (int k = 0; k <= grid.nl(); ++k) {
      worst = std::max(worst, std::abs(f(i, 0, k) - f.vertex(k)));
    }
  }
  return worst;
}

OrderingReport compare_pointwise(const NetworkFunction& u, const NetworkFunction& v,
                                 double tolerance) {
  if (!(u.grid() == v.grid())) {
    throw std::invalid_argument("compare_pointwise: grid mismatch");
  }
  OrderingReport report;
  const Grid& grid = u.grid();
  bool first = true;
  for (int i = 0; i < u.ray_count(); ++i) {
    for (int k = 0; k <= grid.nl(); ++k) {
      for (int j = 0; j <= grid.nx(); ++j) {
        const double d = u(i, j, k) - v(i, j, k);
        if (first || d < report.min_difference) {
          report.min_difference = d;
          report.min_location = {i, j, k};
        }
        if (first || d > report.max_difference) report.max_difference = d;
        first = false;
      }
    }
  }
  report.holds = report.min_difference >= -tolerance;
  return report;
}

}  // namespace spider
