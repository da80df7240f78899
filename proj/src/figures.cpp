#include <array>
#include <cmath>
#include <sstream>

#include "aoi/error.hpp"
#include "aoi/experiments.hpp"
#include "aoi/openloop_analytic.hpp"
#include "aoi/parallel.hpp"
#include "aoi/pattern_search.hpp"
#include "aoi/prob_optimizer.hpp"
#include "aoi/two_source.hpp"

namespace aoi {

namespace {

std::vector<double> range(double from, double to, double step) {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

Table make_table(const std::string& name, std::vector<std::string> columns,
                 const ReproduceOptions& options, const std::vector<double>& grid,
                 bool simulated) {
  std::ostringstream id;
  id << "reproduce " << name;
  for (double x : grid) id << ' ' << x;
  if (simulated) {
    id << " seed=" << options.seed << " replications=" << options.replications
       << " events=" << options.events << " search_events=" << options.ra_sb_events
       << " search_replications=" << options.ra_sb_replications;
  }
  if (options.kmax) id << " kmax=" << *options.kmax;
  Table t;
  t.name = name;
  t.columns = std::move(columns);
  t.config_hash = fnv1a(id.str());
  t.seed = options.seed;
  return t;
}

template <class Row>
void fill_rows(Table& table, const std::vector<double>& grid, Row&& row) {
  table.rows.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    for (double v : row(grid[i])) table.rows[i].emplace_back(v);
  });
}

// Both figures share the source-1 setup: exponential, mean 5, weight 0.8.
std::vector<double> two_source_row(double x, const SystemSpec& sys) {
  const auto th = solve_theorem1(sys);
  const auto pg = optimize_pgaw_two(sys);
  const double rr = cgaw_system_aoi(Pattern{1, 2}, sys);
  return {x,
          rr,
          pg.system_aoi,
          th.system_aoi,
          pg.p(1),
          static_cast<double>(th.n_prime()),
          static_cast<double>(th.k_n_prime()),
          static_cast<double>(th.policy.k1()),
          static_cast<double>(th.policy.k2())};
}

Table fig2(const ReproduceOptions& options) {
  const auto grid = options.grid.value_or(range(1.0, 60.0, 1.0));
  Table t = make_table("fig2", {"s2", "rr", "pgaw_star", "cgaw_star", "p1_star", "n_prime",
                                "k_star", "k1", "k2"},
                       options, grid, false);
  fill_rows(t, grid, [](double s2) {
    const SystemSpec sys({SourceSpec::from_scv(0.8, 5.0, 1.0), SourceSpec::from_scv(0.2, s2, 1.0)});
    return two_source_row(s2, sys);
  });
  return t;
}

Table fig3(const ReproduceOptions& options) {
  const auto grid = options.grid.value_or(range(225.0, 4500.0, 225.0));
  Table t = make_table("fig3", {"q2", "rr", "pgaw_star", "cgaw_star", "p1_star", "n_prime",
                                "k_star", "k1", "k2"},
                       options, grid, false);
  fill_rows(t, grid, [](double q2) {
    const SystemSpec sys({SourceSpec(0.8, 5.0, 50.0), SourceSpec(0.2, 15.0, q2)});
    return two_source_row(q2, sys);
  });
  return t;
}

Table fig6(const std::string& name, const std::array<double, 3>& scv,
           const ReproduceOptions& options) {
  const auto grid = options.grid.value_or(range(1.0, 20.0, 1.0));
  Table t = make_table(name, {"s3", "rr", "pgaw_star", "is", "is_cycle_length", "p1_star",
                              "p2_star", "p3_star"},
                       options, grid, false);
  fill_rows(t, grid, [&](double s3) {
    const double w = 1.0 / 3.0;
    const SystemSpec sys({SourceSpec::from_scv(w, 2.0, scv[0]), SourceSpec::from_scv(w, 5.0, scv[1]),
                          SourceSpec::from_scv(w, s3, scv[2])});
    std::optional<std::size_t> kmax;
    if (options.kmax) kmax = static_cast<std::size_t>(*options.kmax);
    const auto is = insertion_search(sys, kmax);
    const auto pg = optimize_pgaw_multi(sys);
    return std::vector<double>{s3,
                               cgaw_system_aoi(Pattern{1, 2, 3}, sys),
                               pg.system_aoi,
                               is.system_aoi,
                               static_cast<double>(is.pattern.size()),
                               pg.p(1),
                               pg.p(2),
                               pg.p(3)};
  });
  return t;
}

Table fig5(const std::string& name, RateRule rule, const ReproduceOptions& options) {
  const auto grid = options.grid.value_or(range(0.25, 1.5, 0.25));
  Table t = make_table(name, {"rho", "lambda1", "lambda2", "ra_sb_star", "ra_sb_star_hw",
                              "lcfs_w", "lcfs_w_hw", "sps", "sps_hw", "pr", "pr_hw",
                              "p12_star", "p21_star"},
                       options, grid, true);
  const std::vector<SourceConfig> sources{{0.8, 0.5, 1.0, Family::Exponential},
                                          {0.2, 1.0, 1.0, Family::Exponential}};
  const SystemSpec sys = make_system(sources);
  const auto pr = PatternReplacement::from_optimum(solve_theorem1(sys));

  for (double rho : grid) {
    ArrivalSpec arrivals;
    arrivals.rule = rule;
    arrivals.load = rho;
    const Vector rates = arrival_rates(arrivals, sources);

    SimConfig sim;
    sim.services = make_services(sources);
    sim.horizon_events = options.events;
    sim.replications = options.replications;
    sim.seed = options.seed;

    SimConfig probe = sim;
    probe.mode = RandomArrival{rates, LcfsW{}};
    probe.horizon_events = options.ra_sb_events;
    probe.replications = options.ra_sb_replications;
    probe.seed = split_seed(options.seed, 0x5b);
    const auto best = search_ra_sb(probe, sys);

    const auto run = [&](BufferPolicy policy) {
      sim.mode = RandomArrival{rates, std::move(policy)};
      return simulate_ra(sim, sys);
    };
    const auto hw = [](const AoiReport& r) { return r.system_half_width.value_or(0.0); };
    const auto sb = run(RaSingleBuffer::pair(best.p12, best.p21));
    const auto lcfs = run(LcfsW{});
    const auto sps = run(Sps{});
    const auto prr = run(pr);
    std::vector<Cell> row;
    for (double v : {rho, rates[0], rates[1], sb.system_aoi, hw(sb), lcfs.system_aoi, hw(lcfs),
                     sps.system_aoi, hw(sps), prr.system_aoi, hw(prr), best.p12, best.p21}) {
      row.emplace_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"fig2", "fig3", "fig5a", "fig5b", "fig6"};
  return names;
}

std::vector<Table> cmd_reproduce(const std::string& figure, const ReproduceOptions& options) {
  if (options.grid) {
    for (std::size_t i = 1; i < options.grid->size(); ++i) {
      if (!((*options.grid)[i] > (*options.grid)[i - 1])) {
        throw Error(ErrorKind::Config, "grid must be strictly increasing");
      }
    }
    if (options.grid->empty()) throw Error(ErrorKind::Config, "grid must be nonempty");
  }
  if (figure == "fig2") return {fig2(options)};
  if (figure == "fig3") return {fig3(options)};
  if (figure == "fig5a") return {fig5("fig5a", RateRule::Equal, options)};
  if (figure == "fig5b") return {fig5("fig5b", RateRule::SqrtWeightOverMean, options)};
  if (figure == "fig6") {
    return {fig6("fig6a", {0.0, 0.0, 0.0}, options), fig6("fig6b", {1.0, 1.0, 1.0}, options),
            fig6("fig6c", {0.0, 1.0, 5.0}, options)};
  }
  throw Error(ErrorKind::Config, "unknown figure '" + figure +
                                     "'; expected fig2, fig3, fig5a, fig5b or fig6");
}

}  // namespace aoi
