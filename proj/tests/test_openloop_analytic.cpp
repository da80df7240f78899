#include <doctest.h>

#include <numeric>
#include <random>

#include "aoi/openloop_analytic.hpp"
#include "oracles.hpp"

using namespace aoi;

namespace {

SystemSpec identical(std::size_t n, double mean, double scv) {
  std::vector<SourceSpec> s(n, SourceSpec::from_scv(1.0 / static_cast<double>(n), mean, scv));
  return SystemSpec(s);
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("ProbVector validation") {
  CHECK_NOTHROW(ProbVector({0.25, 0.75}));
  CHECK_THROWS_AS(ProbVector({0.5, 0.6}), Error);
  try {
    ProbVector({1.0, 0.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundedAge);
  }
  try {
    ProbVector({1.0 - 1e-13, 1e-13});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundedAge);
  }
}

TEST_CASE("pgaw_gap_moments") {
  SUBCASE("symmetric exponential pair") {
    const auto g = pgaw_gap_moments(ProbVector({0.5, 0.5}), identical(2, 1.0, 1.0), 1);
    CHECK(g.mean == doctest::Approx(1.0));
    CHECK(g.second_moment == doctest::Approx(4.0));
  }
  SUBCASE("dominant source is served almost always") {
    const SystemSpec sys = identical(2, 1.0, 1.0);
    const double eps = 1e-6;
    const auto g = pgaw_gap_moments(ProbVector({1.0 - eps, eps}), sys, 1);
    CHECK(g.mean == doctest::Approx(eps / (1.0 - eps)));
    CHECK(g.mean < 1e-5);
  }
  SUBCASE("three identical deterministic sources") {
    const auto g = pgaw_gap_moments(ProbVector::uniform(3), identical(3, 1.0, 0.0), 2);
    CHECK(g.mean == doctest::Approx(2.0));
    CHECK(g.second_moment == doctest::Approx(10.0));
  }
  SUBCASE("matches finite differences of the gap MGF") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mean(0.2, 3.0);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 2 + trial % 3;
      std::vector<double> means(n);
      std::vector<bool> expo(n);
      std::vector<SourceSpec> sources;
      for (std::size_t i = 0; i < n; ++i) {
        means[i] = mean(rng);
        expo[i] = coin(rng);
        sources.push_back(SourceSpec::from_scv(1.0, means[i], expo[i] ? 1.0 : 0.0));
      }
      const SystemSpec sys(sources);
      Vector pv = oracle::random_simplex(rng, n);
      pv = (pv.array() + 0.1).matrix();
      pv /= pv.sum();
      const ProbVector p(pv);
      for (std::size_t src = 0; src < n; ++src) {
        const auto [m1, m2] =
            oracle::pgaw_gap_by_differences(to_std(pv), means, expo, src);
        const auto g = pgaw_gap_moments(p, sys, static_cast<int>(src + 1));
        CHECK(oracle::rel_close(g.mean, m1, 1e-6));
        CHECK(oracle::rel_close(g.second_moment, m2, 1e-5));
      }
    }
  }
  CHECK_THROWS_AS(pgaw_gap_moments(ProbVector({0.5, 0.5}), identical(2, 1, 1), 3), Error);
}

TEST_CASE("pgaw_aoi") {
  CHECK(pgaw_aoi(ProbVector({0.5, 0.5}), identical(2, 1.0, 1.0)).system_aoi ==
        doctest::Approx(3.0));
  const SystemSpec lopsided({SourceSpec::from_scv(1.0, 5.0, 1.0),
                             SourceSpec::from_scv(0.0, 15.0, 1.0)});
  const auto r = pgaw_aoi(ProbVector({0.3, 0.7}), lopsided);
  CHECK(r.system_aoi == r.per_source[0].mean);
  CHECK(r.method == Method::Analytic);

  // Identical sources with uniform probabilities see identical ages.
  const auto sym = pgaw_aoi(ProbVector::uniform(4), identical(4, 2.0, 0.7));
  for (const auto& s : sym.per_source) {
    CHECK(s.mean == doctest::Approx(sym.per_source[0].mean).epsilon(1e-14));
  }
}

TEST_CASE("subpatterns") {
  const Pattern p{3, 1, 2, 3, 1, 3, 2};
  const auto sub = subpatterns(p, 1);
  REQUIRE(sub.size() == 2);
  CHECK(sub[0] == std::vector<int>{2, 3});
  CHECK(sub[1] == std::vector<int>{3, 2, 3});
  CHECK(subpatterns(Pattern{1, 2}, 1) == std::vector<Subpattern>{{2}});
  CHECK(subpatterns(Pattern{1, 1, 2}, 1) == std::vector<Subpattern>{{}, {2}});
  CHECK_THROWS_AS(subpatterns(Pattern{1, 1}, 2), Error);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const Pattern q(oracle::random_feasible_pattern(rng, n, n + trial % 9));
    for (int src = 1; src <= static_cast<int>(n); ++src) {
      const auto parts = subpatterns(q, src);
      std::size_t total = 0;
      for (const auto& part : parts) {
        total += part.size();
        CHECK(std::find(part.begin(), part.end(), src) == part.end());
      }
      CHECK(parts.size() == static_cast<std::size_t>(q.count(src)));
      CHECK(total == q.size() - static_cast<std::size_t>(q.count(src)));
    }
  }
}

TEST_CASE("cgaw_gap_moments") {
  const SystemSpec expo({SourceSpec::from_scv(0.5, 5.0, 1.0), SourceSpec::from_scv(0.5, 15.0, 1.0)});
  auto g = cgaw_gap_moments(Pattern{1, 2}, expo, 1);
  CHECK(g.mean == doctest::Approx(15.0));
  CHECK(g.second_moment == doctest::Approx(450.0));

  const SystemSpec det = identical(2, 1.0, 0.0);
  g = cgaw_gap_moments(Pattern{1, 1, 2}, det, 1);
  CHECK(g.mean == doctest::Approx(0.5));
  CHECK(g.second_moment == doctest::Approx(0.5));

  for (int n : {1, 2}) {
    const auto a = cgaw_gap_moments(Pattern{1, 2}, expo, n);
    const auto b = cgaw_gap_moments(Pattern{1, 2, 1, 2}, expo, n);
    CHECK(a.mean == b.mean);
    CHECK(a.second_moment == b.second_moment);
  }
  CHECK_THROWS_AS(cgaw_gap_moments(Pattern{1, 1}, expo, 1), Error);
}

TEST_CASE("cgaw_aoi") {
  CHECK(cgaw_aoi(Pattern{1, 2}, identical(2, 1.0, 0.0)).system_aoi == doctest::Approx(2.0));
  CHECK(cgaw_aoi(Pattern{1, 2}, identical(2, 1.0, 1.0)).system_aoi == doctest::Approx(2.5));

  SUBCASE("infeasible pattern names the missing sources") {
    try {
      cgaw_aoi(Pattern{1, 3, 1}, identical(4, 1.0, 1.0));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Infeasible);
      CHECK(std::string(e.what()).find("2, 4") != std::string::npos);
    }
  }

  SUBCASE("matches the per-cycle renewal-reward oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + trial % 4;
      const SystemSpec sys = oracle::random_system(rng, n);
      const auto entries = oracle::random_feasible_pattern(rng, n, n + trial % 11);
      const auto expected = oracle::cyclic_aoi_by_cycles(
          entries, to_std(sys.means()), to_std(sys.second_moments()));
      const auto got = cgaw_aoi(Pattern(entries), sys);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(oracle::rel_close(got.per_source[i].mean, expected[i], 1e-12));
      }
    }
  }

  SUBCASE("rotation and repetition invariance") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + trial % 3;
      const SystemSpec sys = oracle::random_system(rng, n);
      const Pattern p(oracle::random_feasible_pattern(rng, n, n + trial % 7));
      const Vector base = cgaw_aoi(p, sys).means();
      for (std::size_t k = 0; k < p.size(); ++k) {
        const Vector rot = cgaw_aoi(p.rotated(k), sys).means();
        CHECK(((rot - base).cwiseAbs().array() <= 1e-13 * base.array()).all());
      }
      for (std::size_t m = 2; m <= 4; ++m) {
        const Vector rep = cgaw_aoi(p.repeated(m), sys).means();
        CHECK(((rep - base).cwiseAbs().array() <= 1e-13 * base.array()).all());
      }
    }
  }
}
