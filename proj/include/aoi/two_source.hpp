#pragma once

// Closed-form optimal cyclic scheduling for two sources.

#include <optional>
#include <vector>

#include "aoi/core_model.hpp"

namespace aoi {

/// (K1, K2, r): K1 source-1 and K2 source-2 slots per cycle, with r[k]
/// source-2 slots after the k-th source-1 slot.
class TwoSourcePolicy {
 public:
  /// Throws Error{InvalidArgument} unless K1, K2 >= 1, |r| = K1, r >= 0
  /// and sum(r) = K2.
  TwoSourcePolicy(int k1, int k2, std::vector<int> placement);
  /// Uses the optimal placement for (k1, k2).
  static TwoSourcePolicy balanced(int k1, int k2);

  int k1() const { return k1_; }
  int k2() const { return k2_; }
  int cycle_length() const { return k1_ + k2_; }
  const std::vector<int>& placement() const { return placement_; }
  /// z: source-1 slots after each source-2 slot, in cyclic order starting
  /// after the first source-2 slot.
  std::vector<int> dual_placement() const;

  bool operator==(const TwoSourcePolicy&) const = default;

 private:
  int k1_;
  int k2_;
  std::vector<int> placement_;
};

/// Placement balancing both sources: for K1 <= K2 every gap is floor or
/// ceil of K2/K1, the shorter gaps first; for K1 > K2 the source-1 runs
/// between source-2 slots are balanced the same way.
std::vector<int> optimal_placement(int k1, int k2);

Pattern policy_to_pattern(const TwoSourcePolicy& policy);

struct PairAoi {
  double source1 = 0.0;
  double source2 = 0.0;

  double weighted(const SystemSpec& sys) const {
    return sys.weights()[0] * source1 + sys.weights()[1] * source2;
  }
};

/// Mean ages under (K1, 1).
PairAoi aoi_k1_family(int k1, const SystemSpec& sys);
/// Mean ages under (1, K2).
PairAoi aoi_k2_family(int k2, const SystemSpec& sys);

struct PsiValues {
  std::optional<double> psi1;  // undefined when w2 = 0
  std::optional<double> psi2;  // undefined when w1 = 0
};

/// Discriminants of the (K1,1) and (1,K2) families, computed with the
/// normalized weights.
PsiValues psi_values(const SystemSpec& sys);

enum class TheoremOneBranch { RoundRobin, ManySource1, ManySource2 };
const char* to_string(TheoremOneBranch branch);

struct TheoremOneResult {
  TwoSourcePolicy policy;
  double psi1 = 0.0;
  double psi2 = 0.0;
  std::optional<double> x_star{};  // relaxed K1 (needs psi1 >= 0)
  std::optional<double> y_star{};  // relaxed K2 (needs psi2 >= 0)
  double system_aoi = 0.0;       // raw weights
  PairAoi per_source{};
  TheoremOneBranch branch = TheoremOneBranch::RoundRobin;

  Pattern pattern() const { return policy_to_pattern(policy); }
  /// Source sent several times per cycle (1 for round robin).
  int n_prime() const { return branch == TheoremOneBranch::ManySource2 ? 2 : 1; }
  /// Its number of slots per cycle.
  int k_n_prime() const { return n_prime() == 1 ? policy.k1() : policy.k2(); }
};

/// Optimal two-source cyclic policy. Throws Error{InvalidArgument} if
/// N != 2 and Error{DegenerateWeights} if a weight is zero.
TheoremOneResult solve_theorem1(const SystemSpec& sys);

struct Decomposition {
  double lhs = 0.0;  // system AoI of the policy
  double rhs = 0.0;  // cycle-time weighted mix of the two auxiliary policies
};

/// Writes the system AoI of a balanced (K1, K2) policy, K1 <= K2, as the
/// cycle-time weighted mix of (1, floor(g)-1) and (1, floor(g)) with
/// g = (K1+K2)/K1. For integer g the mix degenerates to (1, g-1).
Decomposition decomposition_check(const TwoSourcePolicy& policy,
                                  const SystemSpec& sys);

}  // namespace aoi
