#pragma once

// Best transmission-probability vector for the probabilistic scheduler.

#include <cstdint>

#include "aoi/openloop_analytic.hpp"

namespace aoi {

struct ProbOptimum {
  ProbVector p;
  double system_aoi = 0.0;
};

/// Floor on every probability during the search.
inline constexpr double kMinSearchProbability = 1e-6;

/// N = 2: coarse grid over p1 followed by golden-section refinement of the
/// best cell down to |dp| <= tol.
ProbOptimum optimize_pgaw_two(const SystemSpec& sys, double tol = 1e-8,
                              double grid_step = 1e-3);

struct MultiStartOptions {
  int restarts = 32;  // the first start is always the uniform vector
  double tol = 1e-8;
  std::uint64_t seed = 0x5eed;
  int max_sweeps = 2000;
};

/// Any N >= 2: multi-start coordinate-wise line search on the simplex.
/// A move sets p_i to a new value and rescales the other entries to keep
/// the sum at one. Best result over restarts; ties go to the
/// lexicographically smallest vector.
ProbOptimum optimize_pgaw_multi(const SystemSpec& sys,
                                const MultiStartOptions& options = {});

}  // namespace aoi
