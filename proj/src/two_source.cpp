#include "aoi/two_source.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aoi/openloop_analytic.hpp"

namespace aoi {

namespace {

void require_two_sources(const SystemSpec& sys) {
  if (sys.size() != 2) {
    throw Error(ErrorKind::InvalidArgument,
                "two-source routine called with N = " + std::to_string(sys.size()));
  }
}

}  // namespace

TwoSourcePolicy::TwoSourcePolicy(int k1, int k2, std::vector<int> placement)
    : k1_(k1), k2_(k2), placement_(std::move(placement)) {
  if (k1_ < 1 || k2_ < 1) {
    throw Error(ErrorKind::InvalidArgument, "K1 and K2 must be at least 1");
  }
  if (placement_.size() != static_cast<std::size_t>(k1_)) {
    throw Error(ErrorKind::InvalidArgument, "placement must have K1 entries");
  }
  if (std::any_of(placement_.begin(), placement_.end(),
                  [](int r) { return r < 0; })) {
    throw Error(ErrorKind::InvalidArgument, "placement entries must be >= 0");
  }
  if (std::accumulate(placement_.begin(), placement_.end(), 0) != k2_) {
    throw Error(ErrorKind::InvalidArgument, "placement must sum to K2");
  }
}

TwoSourcePolicy TwoSourcePolicy::balanced(int k1, int k2) {
  return TwoSourcePolicy(k1, k2, optimal_placement(k1, k2));
}

std::vector<int> TwoSourcePolicy::dual_placement() const {
  const Pattern p = policy_to_pattern(*this);
  std::vector<int> z;
  // Start after the first source-2 slot and count source-1 runs.
  std::size_t first = 0;
  while (p[first] != 2) ++first;
  int run = 0;
  for (std::size_t step = 1; step <= p.size(); ++step) {
    if (p[(first + step) % p.size()] == 2) {
      z.push_back(run);
      run = 0;
    } else {
      ++run;
    }
  }
  return z;
}

std::vector<int> optimal_placement(int k1, int k2) {
  if (k1 < 1 || k2 < 1) {
    throw Error(ErrorKind::InvalidArgument, "K1 and K2 must be at least 1");
  }
  if (k1 > k2) {
    // Source-1 gaps are 0 or 1 either way; balance the runs of source 1
    // between source-2 slots instead.
    std::vector<int> r;
    for (int run : optimal_placement(k2, k1)) {
      r.insert(r.end(), static_cast<std::size_t>(run - 1), 0);
      r.push_back(1);
    }
    return r;
  }
  const int k = k1 + k2;
  const int gamma_floor = k / k1;
  if (k % k1 == 0) return std::vector<int>(static_cast<std::size_t>(k1), gamma_floor - 1);
  const int gamma_ceil = gamma_floor + 1;
  const int shorter = k1 * gamma_ceil - k;
  std::vector<int> r(static_cast<std::size_t>(k1), gamma_floor);
  std::fill_n(r.begin(), shorter, gamma_floor - 1);
  return r;
}

Pattern policy_to_pattern(const TwoSourcePolicy& policy) {
  std::vector<int> entries;
  entries.reserve(static_cast<std::size_t>(policy.cycle_length()));
  for (int r : policy.placement()) {
    entries.push_back(1);
    entries.insert(entries.end(), static_cast<std::size_t>(r), 2);
  }
  return Pattern(std::move(entries));
}

PairAoi aoi_k1_family(int k1, const SystemSpec& sys) {
  require_two_sources(sys);
  if (k1 < 1) throw Error(ErrorKind::InvalidArgument, "K1 must be at least 1");
  const double s1 = sys.means()[0], s2 = sys.means()[1];
  const double q1 = sys.second_moments()[0], q2 = sys.second_moments()[1];
  const double x = k1;
  const double denom = 2.0 * (x * s1 + s2);
  return {(x * (2.0 * s1 * s1 + q1) + 4.0 * s1 * s2 + q2) / denom,
          (x * x * s1 * s1 + x * (4.0 * s1 * s2 + q1 - s1 * s1) +
           2.0 * s2 * s2 + q2) /
              denom};
}

PairAoi aoi_k2_family(int k2, const SystemSpec& sys) {
  require_two_sources(sys);
  if (k2 < 1) throw Error(ErrorKind::InvalidArgument, "K2 must be at least 1");
  const PairAoi mirrored = aoi_k1_family(k2, sys.swapped_pair());
  return {mirrored.source2, mirrored.source1};
}

PsiValues psi_values(const SystemSpec& sys) {
  require_two_sources(sys);
  const Vector w = sys.normalized_weights();
  const double s1 = sys.means()[0], s2 = sys.means()[1];
  const double q1 = sys.second_moments()[0], q2 = sys.second_moments()[1];
  PsiValues psi;
  if (w[1] > 0.0) {
    psi.psi1 = (s1 * q2 - q1 * s2 + (w[0] + 1.0) * s1 * s1 * s2 -
                w[1] * s2 * s2 * s1) /
               (s1 * w[1]);
  }
  if (w[0] > 0.0) {
    psi.psi2 = (s2 * q1 - q2 * s1 + (w[1] + 1.0) * s2 * s2 * s1 -
                w[0] * s1 * s1 * s2) /
               (s2 * w[0]);
  }
  return psi;
}

const char* to_string(TheoremOneBranch branch) {
  switch (branch) {
    case TheoremOneBranch::RoundRobin: return "round-robin";
    case TheoremOneBranch::ManySource1: return "many-source-1";
    case TheoremOneBranch::ManySource2: return "many-source-2";
  }
  return "?";
}

TheoremOneResult solve_theorem1(const SystemSpec& sys) {
  require_two_sources(sys);
  if (!sys.all_weights_positive()) {
    throw Error(ErrorKind::DegenerateWeights,
                "both weights must be positive; a zero-weight source would be "
                "starved by the optimum");
  }
  const PsiValues psi = psi_values(sys);
  const double s1 = sys.means()[0], s2 = sys.means()[1];
  const double threshold = (s1 + s2) * (s1 + s2);

  TheoremOneResult result{.policy = TwoSourcePolicy(1, 1, {1})};
  result.psi1 = *psi.psi1;
  result.psi2 = *psi.psi2;
  if (result.psi1 >= 0.0) result.x_star = (std::sqrt(result.psi1) - s2) / s1;
  if (result.psi2 >= 0.0) result.y_star = (std::sqrt(result.psi2) - s1) / s2;

  struct Candidate {
    int k1;
    int k2;
    PairAoi aoi;
  };
  std::vector<Candidate> candidates{{1, 1, aoi_k1_family(1, sys)}};
  if (result.psi1 > threshold) {
    for (double k : {std::floor(*result.x_star), std::ceil(*result.x_star)}) {
      const int k1 = std::max(1, static_cast<int>(k));
      candidates.push_back({k1, 1, aoi_k1_family(k1, sys)});
    }
  }
  if (result.psi2 > threshold) {
    for (double k : {std::floor(*result.y_star), std::ceil(*result.y_star)}) {
      const int k2 = std::max(1, static_cast<int>(k));
      candidates.push_back({1, k2, aoi_k2_family(k2, sys)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.k1 + a.k2 < b.k1 + b.k2;
                   });

  const Candidate* best = &candidates.front();
  double best_value = best->aoi.weighted(sys);
  for (const auto& c : candidates) {
    const double v = c.aoi.weighted(sys);
    if (v < best_value - 1e-12 * std::abs(best_value)) {
      best = &c;
      best_value = v;
    }
  }
  result.policy = TwoSourcePolicy::balanced(best->k1, best->k2);
  result.per_source = best->aoi;
  result.system_aoi = best_value;
  if (best->k1 > 1) {
    result.branch = TheoremOneBranch::ManySource1;
  } else if (best->k2 > 1) {
    result.branch = TheoremOneBranch::ManySource2;
  }
  return result;
}

Decomposition decomposition_check(const TwoSourcePolicy& policy,
                                  const SystemSpec& sys) {
  require_two_sources(sys);
  const int k1 = policy.k1();
  const int k = policy.cycle_length();
  if (k1 > policy.k2()) {
    throw Error(ErrorKind::InvalidArgument, "decomposition needs K1 <= K2");
  }
  auto sorted = policy.placement();
  std::sort(sorted.begin(), sorted.end());
  auto expected = optimal_placement(k1, policy.k2());
  std::sort(expected.begin(), expected.end());
  if (sorted != expected) {
    throw Error(ErrorKind::InvalidArgument,
                "decomposition needs the balanced placement");
  }

  Decomposition d;
  d.lhs = cgaw_system_aoi(policy_to_pattern(policy), sys);
  const int g_floor = k / k1;
  if (k % k1 == 0) {
    d.rhs = aoi_k2_family(g_floor - 1, sys).weighted(sys);
    return d;
  }
  const int g_ceil = g_floor + 1;
  const double s1 = sys.means()[0], s2 = sys.means()[1];
  const double t_a = (s2 * (g_floor - 1) + s1) * (k1 * g_ceil - k);
  const double t_b = (s2 * (g_ceil - 1) + s1) * (k1 - k1 * g_ceil + k);
  const double aoi_a = aoi_k2_family(g_floor - 1, sys).weighted(sys);
  const double aoi_b = aoi_k2_family(g_floor, sys).weighted(sys);
  d.rhs = (t_a * aoi_a + t_b * aoi_b) / (t_a + t_b);
  return d;
}

}  // namespace aoi
