#include "spider/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace spider {

std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw std::invalid_argument("solve_tridiagonal: size mismatch");
  }
  std::vector<double> c(n), d(n), x(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
  c[0] = upper[0] / pivot;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * c[i - 1];
    if (pivot == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    c[i] = upper[i] / pivot;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] = d[i] - c[i] * x[i + 1];
  }
  // One step of iterative refinement keeps residuals near machine precision
  // even when the matrix entries are large (stiff second-difference scales).
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ax = diag[i] * x[i];
    if (i > 0) ax += lower[i] * x[i - 1];
    if (i + 1 < n) ax += upper[i] * x[i + 1];
    r[i] = rhs[i] - ax;
  }
  c[0] = upper[0] / diag[0];
  d[0] = r[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * c[i - 1];
    c[i] = upper[i] / pivot;
    d[i] = (r[i] - lower[i] * d[i - 1]) / pivot;
  }
  double corr = d[n - 1];
  x[n - 1] += corr;
  for (std::size_t i = n - 1; i-- > 0;) {
    corr = d[i] - c[i] * corr;
    x[i] += corr;
  }
  return x;
}

double tridiagonal_residual(std::span<const double> lower,
                            std::span<const double> diag,
                            std::span<const double> upper,
                            std::span<const double> rhs,
                            std::span<const double> x) {
  const std::size_t n = diag.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ax = diag[i] * x[i];
    if (i > 0) ax += lower[i] * x[i - 1];
    if (i + 1 < n) ax += upper[i] * x[i + 1];
    worst = std::max(worst, std::abs(rhs[i] - ax));
  }
  return worst;
}

std::vector<double> cumulative_integral(std::span<const double> values, double h) {
  const std::size_t n = values.size();
  if (n < 2) return std::vector<double>(n, 0.0);
  std::vector<double> out(n, 0.0);
  if (n == 2) {
    out[1] = 0.5 * h * (values[0] + values[1]);
    return out;
  }
  for (std::size_t j = 1; j < n; ++j) {
    if (j % 2 == 0) {
      out[j] = out[j - 2] + h / 3.0 * (values[j - 2] + 4.0 * values[j - 1] + values[j]);
    } else if (j + 1 < n) {
      // Quadratic through (j-1, j, j+1) integrated over [x_{j-1}, x_j].
      out[j] = out[j - 1] + h / 12.0 * (5.0 * values[j - 1] + 8.0 * values[j] - values[j + 1]);
    } else {
      out[j] = out[j - 1] + h / 12.0 * (-values[j - 2] + 8.0 * values[j - 1] + 5.0 * values[j]);
    }
  }
  return out;
}

double integrate(std::span<const double> values, double h) {
  auto cum = cumulative_integral(values, h);
  return cum.empty() ? 0.0 : cum.back();
}

double double_integral(std::span<const double> values, double h) {
  auto inner = cumulative_integral(values, h);
  return integrate(inner, h);
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPIDERHJB_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads) {
  const int workers = std::min<std::size_t>(resolve_thread_count(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = static_cast<std::size_t>(w); i < n;
           i += static_cast<std::size_t>(workers)) {
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double RandomStream::uniform() {
  // 53-bit mantissa, strictly inside (0, 1).
  const std::uint64_t bits = engine_();
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * 3.14159265358979323846 * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

}  // namespace spider
