#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spider {

// Solves a tridiagonal system in place. `lower[0]` and `upper[n-1]` are unused.
// The callers only build strictly diagonally dominant systems, so no pivoting.
std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs);

// Residual rhs - A*x of a tridiagonal system, max-norm.
double tridiagonal_residual(std::span<const double> lower,
                            std::span<const double> diag,
                            std::span<const double> upper,
                            std::span<const double> rhs,
                            std::span<const double> x);

// Cumulative integral of uniformly sampled values: out[j] = int_0^{x_j} f.
// Simpson pairs on even nodes, local quadratic correction on odd nodes.
std::vector<double> cumulative_integral(std::span<const double> values, double h);

// Composite Simpson over the whole sample (any interval count >= 1).
double integrate(std::span<const double> values, double h);

// Iterated integral int_0^X int_0^u f(z) dz du on a uniform grid.
double double_integral(std::span<const double> values, double h);

// Runs fn(i) for i in [0, n). Thread count from `threads` if > 0, else the
// SPIDERHJB_THREADS environment variable, else hardware concurrency.
// Results must be written to per-index slots; scheduling never reorders them.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

int resolve_thread_count(int requested);

// Decimal formatting with 17 significant digits (lossless double round trip).
std::string format_full(double v);

// Deterministic stream splitting for per-path RNG seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// Standard normal and uniform draws from a std::mt19937_64 stream. Normals
// use Box-Muller on explicitly constructed uniforms; std::normal_distribution
// is implementation-defined and would break cross-platform reproducibility.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace spider
