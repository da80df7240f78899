#pragma once

// Cyclic pattern search for arbitrary N: greedy insertion search and an
// exhaustive enumeration used as its oracle.

#include <cstdint>
#include <optional>
#include <vector>

#include "aoi/core_model.hpp"

namespace aoi {

/// Inserts a source-n transmission before position k (0 <= k < K).
Pattern insert(const Pattern& pattern, int n, std::size_t k);

enum class SearchStop { Converged, HitKmax };
const char* to_string(SearchStop stop);

struct SearchStep {
  std::size_t cycle_length = 0;
  Pattern pattern;
  double system_aoi = 0.0;
  std::size_t evaluations = 0;  // candidates scored to reach this step
};

struct SearchTrace {
  std::vector<SearchStep> steps;  // starts with round robin
  SearchStop stop = SearchStop::Converged;
};

struct SearchResult {
  Pattern pattern;
  double system_aoi = 0.0;
  SearchTrace trace;
};

/// Default cycle-length cap, 100 N.
std::size_t default_kmax(const SystemSpec& sys);

/// Grows the round-robin pattern one best insertion at a time while the
/// system AoI strictly decreases (by more than 1e-12 relative) and K < kmax.
/// Ties between equally good insertions go to the first (n, k) in scan
/// order. Throws Error{DegenerateWeights} for zero weights and
/// Error{InvalidArgument} for N < 2 or kmax < N.
SearchResult insertion_search(const SystemSpec& sys,
                              std::optional<std::size_t> kmax = std::nullopt);

struct ExhaustiveResult {
  Pattern pattern;
  double system_aoi = 0.0;
  std::uint64_t patterns_evaluated = 0;
};

inline constexpr std::uint64_t kDefaultExhaustiveBudget = 100'000'000;

/// Minimum system AoI over every feasible pattern of length N..k_cap,
/// one representative per rotation class (the lexicographically smallest
/// rotation). Ties go to the shorter pattern, then lexicographic order.
/// Refuses with Error{BudgetExceeded} when sum_K K * N^K exceeds `budget`.
ExhaustiveResult exhaustive_search(const SystemSpec& sys, std::size_t k_cap,
                                   std::uint64_t budget = kDefaultExhaustiveBudget);

}  // namespace aoi
