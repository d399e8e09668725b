#pragma once

// Deterministic reductions over per-path results. The parallel kernels write
// one value per path and reduce with a fixed pairwise tree, so the answer is
// independent of the thread count. The serial reference sums left to right.

#include <cstdint>
#include <span>

#include "susy/sde.hpp"

namespace susy {

/// Fixed-shape pairwise sum (blocks of kTreeLeaf summed left to right).
double tree_sum(std::span<const double> x);
double sequential_sum(std::span<const double> x);

/// Mean and sd / sqrt(n).
Estimate mean_estimate(std::span<const double> x, Exec exec);
/// sum(v w) / sum(w) with a delta-method standard error.
Estimate ratio_estimate(std::span<const double> values, std::span<const double> weights, Exec exec);

/// Thread count used for `threads` (0 means the OpenMP default).
int resolve_threads(int threads);

}  // namespace susy
