#include <doctest.h>

#include <cmath>
#include <random>

#include "aoi/openloop_analytic.hpp"
#include "aoi/two_source.hpp"
#include "oracles.hpp"

using namespace aoi;

namespace {

SystemSpec pair(double s1, double s2, double w1, double w2, double c1 = 1.0,
                double c2 = 1.0) {
  return SystemSpec({SourceSpec::from_scv(w1, s1, c1), SourceSpec::from_scv(w2, s2, c2)});
}

}  // namespace

TEST_CASE("optimal_placement") {
  CHECK(optimal_placement(3, 4) == std::vector<int>{1, 1, 2});
  CHECK(optimal_placement(2, 2) == std::vector<int>{1, 1});
  CHECK(optimal_placement(1, 5) == std::vector<int>{5});
  CHECK(optimal_placement(4, 1) == std::vector<int>{0, 0, 0, 1});
  CHECK(optimal_placement(4, 2) == std::vector<int>{0, 1, 0, 1});
  CHECK(optimal_placement(5, 2) == std::vector<int>{0, 1, 0, 0, 1});
  for (int k1 = 1; k1 <= 12; ++k1) {
    for (int k2 = 1; k2 <= 12; ++k2) {
      const auto r = optimal_placement(k1, k2);
      CHECK(std::accumulate(r.begin(), r.end(), 0) == k2);
      const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
      CHECK(*hi - *lo <= 1);
      const auto z = TwoSourcePolicy(k1, k2, r).dual_placement();
      const auto [zlo, zhi] = std::minmax_element(z.begin(), z.end());
      CHECK(*zhi - *zlo <= 1);
    }
  }
  CHECK_THROWS_AS(optimal_placement(0, 3), Error);
}

TEST_CASE("policy_to_pattern and placement duality") {
  CHECK(policy_to_pattern(TwoSourcePolicy(3, 4, {1, 1, 2})) == Pattern{1, 2, 1, 2, 1, 2, 2});
  CHECK(policy_to_pattern(TwoSourcePolicy(1, 1, {1})) == Pattern{1, 2});
  CHECK(policy_to_pattern(TwoSourcePolicy(2, 1, {0, 1})) == Pattern{1, 1, 2});
  CHECK(TwoSourcePolicy(3, 4, {1, 1, 2}).dual_placement() == std::vector<int>{1, 1, 0, 1});
  CHECK_THROWS_AS(TwoSourcePolicy(2, 3, {1, 1}), Error);
  CHECK_THROWS_AS(TwoSourcePolicy(2, 3, {4, -1}), Error);
}

TEST_CASE("K1 and K2 family closed forms") {
  const SystemSpec sys = pair(5.0, 30.0, 0.8, 0.2);
  auto a = aoi_k1_family(12, sys);
  CHECK(a.source1 == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(a.source2 == doctest::Approx(14700.0 / 180.0).epsilon(1e-12));
  a = aoi_k1_family(11, sys);
  CHECK(a.source1 == doctest::Approx(3500.0 / 170.0).epsilon(1e-12));
  CHECK(a.source2 == doctest::Approx(13500.0 / 170.0).epsilon(1e-12));

  const auto rr = cgaw_aoi(Pattern{1, 2}, sys);
  CHECK(aoi_k1_family(1, sys).source1 == doctest::Approx(rr.per_source[0].mean));
  CHECK(aoi_k2_family(1, sys).source2 == doctest::Approx(rr.per_source[1].mean));

  // Mirror image: the K2 family on a system equals the K1 family on the
  // swapped system.
  const auto k2 = aoi_k2_family(7, sys.swapped_pair());
  const auto k1 = aoi_k1_family(7, sys);
  CHECK(k2.source2 == doctest::Approx(k1.source1));
  CHECK(k2.source1 == doctest::Approx(k1.source2));

  const auto sym = aoi_k2_family(2, pair(1.0, 1.0, 0.5, 0.5));
  CHECK(sym.source2 < sym.source1);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const SystemSpec s = oracle::random_system(rng, 2);
    const int k = 1 + trial % 15;
    const auto v1 = aoi_k1_family(k, s);
    const auto p1 = cgaw_aoi(policy_to_pattern(TwoSourcePolicy::balanced(k, 1)), s);
    CHECK(oracle::rel_close(v1.source1, p1.per_source[0].mean, 1e-12));
    CHECK(oracle::rel_close(v1.source2, p1.per_source[1].mean, 1e-12));
    const auto v2 = aoi_k2_family(k, s);
    const auto p2 = cgaw_aoi(policy_to_pattern(TwoSourcePolicy::balanced(1, k)), s);
    CHECK(oracle::rel_close(v2.source1, p2.per_source[0].mean, 1e-12));
    CHECK(oracle::rel_close(v2.source2, p2.per_source[1].mean, 1e-12));
  }
}

TEST_CASE("psi_values") {
  auto psi = psi_values(pair(1.0, 1.0, 0.5, 0.5));
  CHECK(*psi.psi1 == doctest::Approx(2.0));
  CHECK(*psi.psi2 == doctest::Approx(2.0));
  psi = psi_values(pair(5.0, 30.0, 0.8, 0.2));
  CHECK(*psi.psi1 == doctest::Approx(7950.0).epsilon(1e-12));
  psi = psi_values(pair(5.0, 1.0, 0.8, 0.2));
  CHECK(*psi.psi1 == doctest::Approx(4.0));
  CHECK(*psi.psi2 == doctest::Approx(32.5));
  // Raw weights are normalized first.
  psi = psi_values(pair(5.0, 30.0, 4.0, 1.0));
  CHECK(*psi.psi1 == doctest::Approx(7950.0).epsilon(1e-12));

  // Vanishing weight on source 2 sends psi1 to infinity.
  double previous = 0.0;
  for (double w2 : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double v = *psi_values(pair(5.0, 30.0, 1.0 - w2, w2)).psi1;
    CHECK(v > previous);
    previous = v;
  }
  CHECK(previous > 1e6);
  CHECK_FALSE(psi_values(pair(5.0, 30.0, 1.0, 0.0)).psi1.has_value());

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const SystemSpec s = oracle::random_system(rng, 2);
    const auto p = psi_values(s);
    const Vector w = s.normalized_weights();
    const double s1 = s.means()[0], s2 = s.means()[1];
    const double lhs = *p.psi1 * w[1] * s1 + *p.psi2 * w[0] * s2;
    CHECK(oracle::rel_close(lhs, s1 * s2 * (s1 + s2), 1e-9));
  }
}

TEST_CASE("solve_theorem1") {
  SUBCASE("symmetric sources give round robin") {
    const auto r = solve_theorem1(pair(1.0, 1.0, 0.5, 0.5));
    CHECK(r.policy == TwoSourcePolicy(1, 1, {1}));
    CHECK(r.branch == TheoremOneBranch::RoundRobin);
    CHECK(r.pattern() == Pattern{1, 2});
  }
  SUBCASE("worked instance s = (5, 30)") {
    const auto r = solve_theorem1(pair(5.0, 30.0, 0.8, 0.2));
    CHECK(*r.x_star == doctest::Approx((std::sqrt(7950.0) - 30.0) / 5.0));
    CHECK(*r.x_star == doctest::Approx(11.8326).epsilon(1e-4));
    CHECK(r.policy.k1() == 12);
    CHECK(r.policy.k2() == 1);
    CHECK(r.branch == TheoremOneBranch::ManySource1);
    CHECK(r.n_prime() == 1);
    CHECK(r.k_n_prime() == 12);
    CHECK(r.system_aoi == doctest::Approx(0.8 * 20.0 + 0.2 * 14700.0 / 180.0).epsilon(1e-12));
  }
  SUBCASE("both discriminants below the threshold") {
    const auto r = solve_theorem1(pair(5.0, 1.0, 0.8, 0.2));
    CHECK(r.psi1 == doctest::Approx(4.0));
    CHECK(r.psi2 == doctest::Approx(32.5));
    CHECK(r.policy.cycle_length() == 2);
  }
  SUBCASE("mirrored instance picks the K2 family") {
    const auto r = solve_theorem1(pair(30.0, 5.0, 0.2, 0.8));
    CHECK(r.policy.k1() == 1);
    CHECK(r.policy.k2() == 12);
    CHECK(r.branch == TheoremOneBranch::ManySource2);
    CHECK(r.n_prime() == 2);
    CHECK(r.k_n_prime() == 12);
  }
  SUBCASE("errors") {
    try {
      solve_theorem1(pair(5.0, 30.0, 1.0, 0.0));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateWeights);
    }
    CHECK_THROWS_AS(solve_theorem1(SystemSpec({SourceSpec(1, 1, 1)})), Error);
  }
  SUBCASE("weight scaling leaves the policy unchanged") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      const SystemSpec s = oracle::random_system(rng, 2);
      const SystemSpec scaled({SourceSpec(3.7 * s.weights()[0], s.means()[0], s.second_moments()[0]),
                               SourceSpec(3.7 * s.weights()[1], s.means()[1], s.second_moments()[1])});
      const auto a = solve_theorem1(s);
      const auto b = solve_theorem1(scaled);
      CHECK(a.policy == b.policy);
      CHECK(oracle::rel_close(b.system_aoi, 3.7 * a.system_aoi, 1e-12));
    }
  }
  SUBCASE("discrete argmin of the K1 family lies in {1, floor, ceil}") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      const SystemSpec s = oracle::random_system(rng, 2);
      const auto r = solve_theorem1(s);
      if (!r.x_star) continue;
      int argmin = 1;
      double best = aoi_k1_family(1, s).weighted(s);
      for (int k = 2; k <= 400; ++k) {
        const double v = aoi_k1_family(k, s).weighted(s);
        if (v < best) {
          best = v;
          argmin = k;
        }
      }
      const double x = *r.x_star;
      CHECK((argmin == 1 || argmin == static_cast<int>(std::floor(x)) ||
             argmin == static_cast<int>(std::ceil(x))));
    }
  }
}

TEST_CASE("decomposition_check") {
  const SystemSpec sys = pair(2.0, 3.0, 0.6, 0.4, 0.5, 2.0);
  for (auto [k1, k2] : {std::pair{3, 4}, std::pair{2, 5}, std::pair{2, 2}, std::pair{3, 9}}) {
    const auto d = decomposition_check(TwoSourcePolicy::balanced(k1, k2), sys);
    CHECK(oracle::rel_close(d.lhs, d.rhs, 1e-9));
  }
  CHECK_THROWS_AS(decomposition_check(TwoSourcePolicy::balanced(4, 3), sys), Error);
  CHECK_THROWS_AS(decomposition_check(TwoSourcePolicy(2, 4, {0, 4}), sys), Error);
}
