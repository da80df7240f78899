#pragma once

// Exact mean AoI of open-loop generate-at-will schedulers: probabilistic
// (a probability vector) and cyclic (a pattern).

#include <vector>

#include "aoi/core_model.hpp"

namespace aoi {

/// Transmission probabilities of a probabilistic scheduler.
class ProbVector {
 public:
  /// Entries must all be >= 1e-12 (Error{UnboundedAge} otherwise) and sum
  /// to one within 1e-9 (Error{InvalidArgument}).
  explicit ProbVector(Vector p);
  ProbVector(std::initializer_list<double> p);

  static ProbVector uniform(std::size_t n);

  const Vector& values() const { return p_; }
  std::size_t size() const { return static_cast<std::size_t>(p_.size()); }
  /// 1-based.
  double operator()(int n) const { return p_[n - 1]; }

 private:
  Vector p_;
};

/// First two moments of the time between two successive transmissions of
/// source n (sum of the other sources' services in between).
MomentPair pgaw_gap_moments(const ProbVector& p, const SystemSpec& sys, int n);
AoiReport pgaw_aoi(const ProbVector& p, const SystemSpec& sys);
double pgaw_system_aoi(const ProbVector& p, const SystemSpec& sys);

using Subpattern = std::vector<int>;

/// The alpha_P(n) segments strictly between consecutive appearances of n,
/// in cyclic order starting after the first appearance. The last segment
/// wraps past the end of the pattern.
std::vector<Subpattern> subpatterns(const Pattern& pattern, int n);

/// Gap moments for source n under a cyclic scheduler: averages of the
/// sub-pattern means and second moments. Single O(K) pass.
MomentPair cgaw_gap_moments(const Pattern& pattern, const SystemSpec& sys, int n);
/// Throws Error{Infeasible} naming the missing sources.
AoiReport cgaw_aoi(const Pattern& pattern, const SystemSpec& sys);
/// O(NK) system AoI, the inner loop of every pattern search.
double cgaw_system_aoi(const Pattern& pattern, const SystemSpec& sys);
Vector cgaw_source_aoi(const Pattern& pattern, const SystemSpec& sys);

/// Throws Error{Infeasible} (or InvalidPattern for labels above N).
void require_feasible(const Pattern& pattern, const SystemSpec& sys);

}  // namespace aoi
