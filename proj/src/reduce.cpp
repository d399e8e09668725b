#include "susy/reduce.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <omp.h>

namespace susy {

namespace {

constexpr std::size_t kTreeLeaf = 64;

double pairwise(const double* x, std::size_t n) {
  if (n <= kTreeLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(x, half) + pairwise(x + half, n - half);
}

double sum(std::span<const double> x, Exec exec) {
  return exec == Exec::serial ? sequential_sum(x) : tree_sum(x);
}

}  // namespace

double tree_sum(std::span<const double> x) { return pairwise(x.data(), x.size()); }

double sequential_sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

Estimate mean_estimate(std::span<const double> x, Exec exec) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("mean_estimate: need at least two samples");
  const double mean = sum(x, exec) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (x[i] - mean) * (x[i] - mean);
  const double var = sum(sq, exec) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

Estimate ratio_estimate(std::span<const double> values, std::span<const double> weights,
                        Exec exec) {
  const std::size_t n = values.size();
  if (n != weights.size()) throw std::invalid_argument("ratio_estimate: size mismatch");
  if (n < 2) throw std::invalid_argument("ratio_estimate: need at least two samples");
  std::vector<double> vw(n);
  for (std::size_t i = 0; i < n; ++i) vw[i] = values[i] * weights[i];
  const double sw = sum(weights, exec);
  const double r = sum(vw, exec) / sw;
  // Linearised residuals w_i (v_i - r).
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = weights[i] * (values[i] - r);
    d2[i] = d * d;
  }
  const double wbar = sw / static_cast<double>(n);
  const double var = sum(d2, exec) / static_cast<double>(n - 1);
  return {r, std::sqrt(var / static_cast<double>(n)) / wbar, n};
}

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

}  // namespace susy
