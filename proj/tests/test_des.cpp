#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "aoi/des.hpp"
#include "oracles.hpp"

using namespace aoi;

namespace {

SystemSpec identical(std::size_t n, double mean, double scv) {
  std::vector<SourceSpec> s(n, SourceSpec::from_scv(1.0 / static_cast<double>(n), mean, scv));
  return SystemSpec(s);
}

SimConfig gaw_config(const SystemSpec& sys, SimMode mode, std::uint64_t events, int reps) {
  SimConfig cfg;
  cfg.services = matching_services(sys);
  cfg.mode = std::move(mode);
  cfg.horizon_events = events;
  cfg.replications = reps;
  cfg.seed = 2024;
  return cfg;
}

struct Moments {
  double mean = 0.0;
  double second = 0.0;
};

Moments draw(const DistSpec& spec, std::uint64_t seed, int count) {
  auto stream = make_sampler(spec, seed);
  Moments m;
  for (int i = 0; i < count; ++i) {
    const double x = stream.next();
    m.mean += x;
    m.second += x * x;
  }
  m.mean /= count;
  m.second /= count;
  return m;
}

bool within_se(const SourceAoi& s, double expected, double k = 3.0) {
  return std::abs(s.mean - expected) <= k * s.std_error.value();
}

}  // namespace

TEST_CASE("service samplers match their moments") {
  SUBCASE("deterministic is constant") {
    auto stream = make_sampler(DistSpec::make(Family::Deterministic, 5.0, 0.0), 1);
    for (int i = 0; i < 100; ++i) CHECK(stream.next() == 5.0);
  }
  SUBCASE("exponential mean 1") {
    const auto m = draw(DistSpec::make(Family::Exponential, 1.0, 1.0), 7, 1'000'000);
    CHECK(oracle::rel_close(m.mean, 1.0, 0.01));
    CHECK(oracle::rel_close((m.second - m.mean * m.mean) / (m.mean * m.mean), 1.0, 0.01));
  }
  SUBCASE("gamma mean 2 scv 5 has second moment 24") {
    const auto m = draw(DistSpec::make(Family::Gamma, 2.0, 5.0), 7, 1'000'000);
    CHECK(oracle::rel_close(m.mean, 2.0, 0.01));
    CHECK(oracle::rel_close(m.second, 24.0, 0.01));
  }
  SUBCASE("hyperexponential mean 3 scv 4") {
    const auto m = draw(DistSpec::make(Family::HyperExponential2, 3.0, 4.0), 7, 1'000'000);
    CHECK(oracle::rel_close(m.mean, 3.0, 0.01));
    CHECK(oracle::rel_close(m.second, 9.0 * 5.0, 0.03));
  }
  SUBCASE("family and scv must agree") {
    CHECK_THROWS_AS(DistSpec::make(Family::Deterministic, 1.0, 0.5), Error);
    CHECK_THROWS_AS(DistSpec::make(Family::Exponential, 1.0, 2.0), Error);
    CHECK_THROWS_AS(DistSpec::make(Family::Gamma, 1.0, 0.0), Error);
    CHECK_THROWS_AS(DistSpec::make(Family::HyperExponential2, 1.0, 1.0), Error);
    CHECK_THROWS_AS(DistSpec::make(Family::Gamma, -1.0, 1.0), Error);
    CHECK(DistSpec::matching(2.0, 0.0).family == Family::Deterministic);
    CHECK(DistSpec::matching(2.0, 1.0).family == Family::Exponential);
    CHECK(DistSpec::matching(2.0, 5.0).family == Family::Gamma);
  }
}

TEST_CASE("split_seed gives distinct streams") {
  std::map<std::uint64_t, int> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) ++seen[split_seed(42, r)];
  CHECK(seen.size() == 1000);
  CHECK(split_seed(42, 0) != split_seed(43, 0));
}

TEST_CASE("deterministic round robin averages exactly") {
  const SystemSpec sys = identical(2, 1.0, 0.0);
  const auto report = simulate_gaw(gaw_config(sys, GawCyclic{Pattern{1, 2}}, 1001, 5), sys);
  for (const auto& s : report.per_source) {
    CHECK(s.mean == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(*s.half_width <= 1e-12);
  }
}

TEST_CASE("simulation agrees with the analytic model") {
  SUBCASE("exponential round robin") {
    const SystemSpec sys = identical(2, 1.0, 1.0);
    const auto report =
        simulate_gaw(gaw_config(sys, GawCyclic{Pattern{1, 2}}, 1'000'000, 10), sys);
    for (const auto& s : report.per_source) CHECK(within_se(s, 2.5));
  }
  SUBCASE("probabilistic, symmetric") {
    const SystemSpec sys = identical(2, 1.0, 1.0);
    const auto report = simulate_gaw(
        gaw_config(sys, GawProbabilistic{ProbVector({0.5, 0.5})}, 1'000'000, 10), sys);
    CHECK(within_se(report.per_source[0], 3.0));
  }
  SUBCASE("probabilistic, unequal means") {
    const SystemSpec sys({SourceSpec::from_scv(0.8, 5.0, 1.0), SourceSpec::from_scv(0.2, 15.0, 1.0)});
    const ProbVector p({0.7, 0.3});
    const auto analytic = pgaw_aoi(p, sys);
    const auto report = simulate_gaw(gaw_config(sys, GawProbabilistic{p}, 500'000, 10), sys);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(within_se(report.per_source[i], analytic.per_source[i].mean));
      CHECK(oracle::rel_close(report.per_source[i].mean, analytic.per_source[i].mean, 0.01));
    }
  }
  SUBCASE("three sources, mixed families, cyclic") {
    const SystemSpec sys({SourceSpec::from_scv(0.5, 1.0, 0.0), SourceSpec::from_scv(0.3, 2.0, 1.0),
                          SourceSpec::from_scv(0.2, 0.5, 5.0)});
    const Pattern pattern{1, 3, 2, 1, 3};
    const auto analytic = cgaw_aoi(pattern, sys);
    const auto report = simulate_gaw(gaw_config(sys, GawCyclic{pattern}, 500'000, 10), sys);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(within_se(report.per_source[i], analytic.per_source[i].mean));
    }
    CHECK(std::abs(report.system_aoi - analytic.system_aoi) <= 3.0 * *report.system_std_error);
  }
}

TEST_CASE("runs are reproducible from the seed") {
  const SystemSpec sys = identical(3, 1.0, 2.0);
  auto cfg = gaw_config(sys, GawProbabilistic{ProbVector::uniform(3)}, 20'000, 4);
  const auto a = run_replications(cfg, sys);
  const auto b = run_replications(cfg, sys);
  REQUIRE(a.size() == b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a[r].system_aoi == b[r].system_aoi);
    CHECK(a[r].integrals == b[r].integrals);
  }
  cfg.seed += 1;
  CHECK(run_replications(cfg, sys)[0].system_aoi != a[0].system_aoi);
}

TEST_CASE("age area equals the sum of per-cycle areas") {
  const SystemSpec sys({SourceSpec::from_scv(0.5, 1.0, 1.0), SourceSpec::from_scv(0.3, 2.0, 3.0),
                        SourceSpec::from_scv(0.2, 0.7, 0.0)});
  const auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2, 1, 3}}, 40'000, 1);

  std::vector<DeliveryEvent> events;
  const auto rec = simulate_replication(cfg, sys, 0, [&](const DeliveryEvent& e) { events.push_back(e); });

  // Window opens at the last delivery before the first in-window one.
  std::size_t first = 0;
  while (!events[first].in_window) ++first;
  const double w0 = events[first - 1].time;
  const double w1 = events.back().time;
  CHECK(oracle::rel_close(w1 - w0, rec.window, 1e-12));

  for (int src = 1; src <= 3; ++src) {
    double gen = 0.0;
    for (std::size_t i = 0; i < first; ++i) {
      if (events[i].source == src) gen = events[i].generated;
    }
    std::vector<const DeliveryEvent*> mine;
    for (std::size_t i = first; i < events.size(); ++i) {
      if (events[i].source == src) mine.push_back(&events[i]);
    }
    REQUIRE(mine.size() > 2);
    // Leading partial piece, then one cycle per pair of consecutive
    // deliveries: A = S T + T^2 / 2 with S the age right after delivery.
    double area = 0.5 * (mine[0]->time - w0) * ((mine[0]->time - gen) + (w0 - gen));
    for (std::size_t k = 0; k + 1 < mine.size(); ++k) {
      const double s = mine[k]->time - mine[k]->service_start;
      const double t = mine[k + 1]->time - mine[k]->time;
      area += s * t + 0.5 * t * t;
    }
    const auto* last = mine.back();
    area += 0.5 * (w1 - last->time) * ((w1 - last->generated) + (last->time - last->generated));
    CHECK(oracle::rel_close(area, rec.integrals[static_cast<std::size_t>(src - 1)], 1e-9));
  }
}

TEST_CASE("age path is a sawtooth") {
  const SystemSpec sys = identical(2, 1.0, 1.0);
  SimConfig cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 10'000, 1);
  cfg.mode = RandomArrival{Vector::Constant(2, 0.8), LcfsW{}};
  std::vector<double> generated(2, 0.0);
  std::vector<double> last_time(2, 0.0);
  bool ok = true;
  simulate_replication(cfg, sys, 0, [&](const DeliveryEvent& e) {
    const auto i = static_cast<std::size_t>(e.source - 1);
    const double before = e.time - generated[i];
    const double after = e.time - e.generated;
    ok = ok && e.generated <= e.service_start && e.service_start <= e.time;
    ok = ok && after >= 0.0 && after <= before && e.time >= last_time[i];
    generated[i] = e.generated;
    last_time[i] = e.time;
  });
  CHECK(ok);
}

TEST_CASE("horizon and config validation") {
  const SystemSpec sys = identical(2, 1.0, 1.0);
  SUBCASE("too short for a window") {
    auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2, 2}}, 4, 1);
    cfg.warmup_fraction = 0.5;
    CHECK_THROWS_AS(simulate_gaw(cfg, sys), Error);
  }
  SUBCASE("service laws must match the system") {
    auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 100, 1);
    cfg.services[1] = DistSpec::make(Family::Exponential, 2.0, 1.0);
    CHECK_THROWS_AS(simulate_gaw(cfg, sys), Error);
  }
  SUBCASE("infeasible pattern") {
    auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 1}}, 100, 1);
    try {
      simulate_gaw(cfg, sys);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Infeasible);
    }
  }
  SUBCASE("pattern replacement needs two sources") {
    const SystemSpec three = identical(3, 1.0, 1.0);
    auto cfg = gaw_config(three, GawCyclic{Pattern{1, 2, 3}}, 100, 1);
    cfg.mode = RandomArrival{Vector::Ones(3), PatternReplacement{}};
    CHECK_THROWS_AS(simulate_ra(cfg, three), Error);
  }
  SUBCASE("replacement matrix diagonal") {
    auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 100, 1);
    auto policy = RaSingleBuffer::pair(0.5, 0.5);
    policy.replace(0, 0) = 0.5;
    cfg.mode = RandomArrival{Vector::Ones(2), policy};
    CHECK_THROWS_AS(simulate_ra(cfg, sys), Error);
  }
  SUBCASE("rates must be positive") {
    auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 100, 1);
    cfg.mode = RandomArrival{Vector::Constant(2, 0.0), LcfsW{}};
    CHECK_THROWS_AS(simulate_ra(cfg, sys), Error);
  }
  SUBCASE("single replication has no interval") {
    const auto report = simulate_gaw(gaw_config(sys, GawCyclic{Pattern{1, 2}}, 1000, 1), sys);
    CHECK_FALSE(report.system_half_width.has_value());
  }
}

TEST_CASE("time horizon") {
  const SystemSpec sys = identical(2, 1.0, 0.0);
  auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 0, 2);
  cfg.horizon_time = 10'000.5;
  const auto report = simulate_gaw(cfg, sys);
  CHECK(report.per_source[0].mean == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("LCFS-W is RA-SB with every replacement probability one") {
  const SystemSpec sys({SourceSpec::from_scv(0.6, 1.0, 1.0), SourceSpec::from_scv(0.4, 2.0, 1.0)});
  auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 50'000, 1);
  const Vector rates{{0.7, 0.4}};

  const auto trace = [&](BufferPolicy policy) {
    cfg.mode = RandomArrival{rates, std::move(policy)};
    std::vector<std::pair<int, double>> out;
    simulate_replication(cfg, sys, 3, [&](const DeliveryEvent& e) { out.emplace_back(e.source, e.time); });
    return out;
  };
  CHECK(trace(LcfsW{}) == trace(RaSingleBuffer::all_ones(2)));
}

TEST_CASE("SPS with a single source is a blocking single-server queue") {
  // Exponential arrivals and service, arrivals during service are lost:
  // mean age is 1/lambda + 2/mu - 1/(lambda + mu).
  const SystemSpec sys({SourceSpec::from_scv(1.0, 1.0, 1.0)});
  auto cfg = gaw_config(sys, GawCyclic{Pattern{1}}, 200'000, 30);
  cfg.mode = RandomArrival{Vector::Constant(1, 1.3), Sps{}};
  const auto report = simulate_ra(cfg, sys);
  CHECK(within_se(report.per_source[0], 1.0 / 1.3 + 2.0 - 1.0 / 2.3));
}

TEST_CASE("SPS never holds two packets of one source") {
  const SystemSpec sys({SourceSpec::from_scv(0.5, 1.0, 1.0), SourceSpec::from_scv(0.5, 2.0, 0.0)});
  auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 20'000, 1);
  cfg.mode = RandomArrival{Vector::Constant(2, 2.0), Sps{}};
  // Every delivered packet arrived after its source's previous delivery, so
  // it never shared the system with a same-source packet.
  double last_delivery[2] = {0.0, 0.0};
  bool ok = true;
  simulate_replication(cfg, sys, 0, [&](const DeliveryEvent& e) {
    auto& last = last_delivery[e.source - 1];
    ok = ok && e.generated >= last;
    last = e.time;
  });
  CHECK(ok);
}

TEST_CASE("heavy traffic reduces to back-to-back service") {
  const SystemSpec sys({SourceSpec::from_scv(1.0, 1.0, 1.0)});
  auto cfg = gaw_config(sys, GawCyclic{Pattern{1}}, 200'000, 10);
  const double gaw = simulate_gaw(cfg, sys).system_aoi;
  cfg.mode = RandomArrival{Vector::Constant(1, 50.0), LcfsW{}};
  const double ra = simulate_ra(cfg, sys).system_aoi;
  CHECK(std::abs(ra - gaw) <= 0.05 * gaw);
  CHECK(ra > gaw);
}

TEST_CASE("pattern-based replacement decisions") {
  const PatternReplacement pr{1, 2, 3};
  SUBCASE("counter below K*: n' displaces n''") {
    CHECK(pr_policy_step(pr, {1, 2, 1}, 1) == BufferAction::Replace);
    CHECK(pr_policy_step(pr, {1, 1, 1}, 2) == BufferAction::Discard);
  }
  SUBCASE("counter at K*: n'' displaces n'") {
    CHECK(pr_policy_step(pr, {1, 1, 3}, 2) == BufferAction::Replace);
    CHECK(pr_policy_step(pr, {1, 2, 3}, 1) == BufferAction::Discard);
  }
  SUBCASE("n'' in service") {
    CHECK(pr_policy_step(pr, {2, 2, 0}, 1) == BufferAction::Replace);
    CHECK(pr_policy_step(pr, {2, 1, 0}, 2) == BufferAction::Discard);
  }
  SUBCASE("self replacement, empty buffer, idle server") {
    CHECK(pr_policy_step(pr, {1, 1, 1}, 1) == BufferAction::Replace);
    CHECK(pr_policy_step(pr, {2, 2, 0}, 2) == BufferAction::Replace);
    CHECK(pr_policy_step(pr, {1, std::nullopt, 3}, 2) == BufferAction::Join);
    CHECK(pr_policy_step(pr, {std::nullopt, std::nullopt, 0}, 2) == BufferAction::StartService);
  }
  SUBCASE("roles from the two-source optimum") {
    const SystemSpec sys({SourceSpec::from_scv(0.8, 5.0, 1.0), SourceSpec::from_scv(0.2, 30.0, 1.0)});
    const auto p = PatternReplacement::from_optimum(solve_theorem1(sys));
    CHECK(p.n_prime == 1);
    CHECK(p.n_double_prime == 2);
    CHECK(p.k_star == 12);
  }
}

TEST_CASE("RA-SB coin use") {
  const auto policy = RaSingleBuffer::pair(0.0, 0.5);
  Engine coin(5);
  const Engine untouched = coin;
  CHECK(ra_sb_step(policy, {2, 2, 0}, 1, coin) == BufferAction::Discard);
  CHECK(ra_sb_step(policy, {1, 1, 0}, 1, coin) == BufferAction::Replace);
  CHECK(coin == untouched);
  int replaced = 0;
  for (int i = 0; i < 10'000; ++i) {
    replaced += ra_sb_step(policy, {1, 1, 0}, 2, coin) == BufferAction::Replace;
  }
  CHECK(coin != untouched);
  CHECK(replaced == doctest::Approx(5000).epsilon(0.05));
}

TEST_CASE("SPS keeps both sources fresh") {
  // With one waiting slot per source nobody is starved, so both sources get
  // served and the system stays stable above unit load.
  const SystemSpec sys({SourceSpec::from_scv(0.8, 0.5, 1.0), SourceSpec::from_scv(0.2, 1.0, 1.0)});
  auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 100'000, 4);
  cfg.mode = RandomArrival{Vector::Constant(2, 1.0), Sps{}};
  const auto records = run_replications(cfg, sys);
  for (const auto& r : records) {
    CHECK(std::isfinite(r.system_aoi));
    CHECK(r.per_source[0] > 0.5);
    CHECK(r.per_source[1] > 1.0);
  }
}

TEST_CASE("RA-SB grid search") {
  const SystemSpec sys({SourceSpec::from_scv(0.8, 0.5, 1.0), SourceSpec::from_scv(0.2, 1.0, 1.0)});
  auto cfg = gaw_config(sys, GawCyclic{Pattern{1, 2}}, 5'000, 1);
  cfg.mode = RandomArrival{Vector::Constant(2, 1.0), LcfsW{}};
  const auto best = search_ra_sb(cfg, sys, 0.25);
  // The winner is at least as good as every grid point, including all-ones.
  cfg.mode = RandomArrival{Vector::Constant(2, 1.0), RaSingleBuffer::all_ones(2)};
  CHECK(best.search_aoi <= simulate_replication(cfg, sys, 0).system_aoi);
  CHECK(best.p12 >= 0.0);
  CHECK(best.p21 <= 1.0);
}
