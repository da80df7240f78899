#include "aoi/experiments.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aoi/error.hpp"
#include "aoi/openloop_analytic.hpp"
#include "aoi/parallel.hpp"
#include "aoi/pattern_search.hpp"
#include "aoi/prob_optimizer.hpp"
#include "aoi/two_source.hpp"

namespace aoi {

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string short_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_vector(const Vector& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += short_number(v[i]);
  }
  return out + ")";
}

std::string csv_field(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  const auto& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// A GAW policy reduced to something the analytic model and simulator can run.
struct ResolvedGaw {
  std::variant<Pattern, ProbVector> schedule;
  std::string detail;
  AoiReport analytic;
};

ResolvedGaw resolve_gaw(const PolicySpec& policy, const SystemSpec& sys,
                        const SearchSettings& search) {
  const auto cyclic = [&](Pattern p, std::string detail) {
    AoiReport report = cgaw_aoi(p, sys);
    return ResolvedGaw{std::move(p), std::move(detail), std::move(report)};
  };
  const auto probabilistic = [&](ProbVector p) {
    AoiReport report = pgaw_aoi(p, sys);
    std::string detail = "p=" + format_vector(p.values());
    return ResolvedGaw{std::move(p), std::move(detail), std::move(report)};
  };
  switch (policy.kind) {
    case PolicyKind::RoundRobin: {
      std::vector<int> entries;
      for (std::size_t n = 1; n <= sys.size(); ++n) entries.push_back(static_cast<int>(n));
      Pattern p(std::move(entries));
      return cyclic(p, p.to_string());
    }
    case PolicyKind::CyclicOptimal: {
      const auto opt = solve_theorem1(sys);
      const Pattern p = opt.pattern();
      return cyclic(p, "(" + std::to_string(opt.policy.k1()) + "," +
                           std::to_string(opt.policy.k2()) + ") " + p.to_string());
    }
    case PolicyKind::ProbabilisticOptimal:
      return probabilistic(sys.size() == 2 ? optimize_pgaw_two(sys).p
                                           : optimize_pgaw_multi(sys).p);
    case PolicyKind::InsertionSearch: {
      std::optional<std::size_t> kmax;
      if (search.kmax) kmax = static_cast<std::size_t>(*search.kmax);
      const auto res = insertion_search(sys, kmax);
      return cyclic(res.pattern, res.pattern.to_string());
    }
    case PolicyKind::ExhaustiveSearch: {
      const auto res = exhaustive_search(sys, static_cast<std::size_t>(search.es_cap));
      return cyclic(res.pattern, res.pattern.to_string());
    }
    case PolicyKind::FixedPattern: {
      Pattern p(policy.pattern);
      return cyclic(p, p.to_string());
    }
    case PolicyKind::FixedProbabilities: {
      Vector v(static_cast<Eigen::Index>(policy.probabilities.size()));
      for (std::size_t i = 0; i < policy.probabilities.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = policy.probabilities[i];
      }
      return probabilistic(ProbVector(v));
    }
    default:
      throw Error(ErrorKind::Config, policy.label() + " is a random-arrival policy");
  }
}

std::vector<std::optional<double>> sweep_points(const ExperimentConfig& cfg) {
  std::vector<std::optional<double>> points;
  if (cfg.sweep) {
    for (double x : cfg.sweep->grid) points.emplace_back(x);
  } else {
    points.emplace_back(std::nullopt);
  }
  return points;
}

Table result_table(const ExperimentConfig& cfg, const std::string& name) {
  Table t;
  t.name = name;
  t.config_hash = cfg.hash;
  t.seed = cfg.simulation.seed;
  if (cfg.sweep) t.columns.push_back(cfg.sweep->variable);
  t.columns.insert(t.columns.end(), {"policy", "detail"});
  const std::size_t n = cfg.sources.size();
  for (std::size_t i = 1; i <= n; ++i) t.columns.push_back("aoi_" + std::to_string(i));
  t.columns.insert(t.columns.end(), {"system_aoi", "method"});
  for (std::size_t i = 1; i <= n; ++i) t.columns.push_back("half_width_" + std::to_string(i));
  t.columns.push_back("system_half_width");
  return t;
}

std::vector<Cell> result_row(std::optional<double> x, const PolicySpec& policy,
                             const std::string& detail, const AoiReport& report) {
  std::vector<Cell> row;
  if (x) row.emplace_back(*x);
  row.emplace_back(policy.label());
  row.emplace_back(detail);
  for (const auto& s : report.per_source) row.emplace_back(s.mean);
  row.emplace_back(report.system_aoi);
  row.emplace_back(std::string(to_string(report.method)));
  const auto optional_cell = [](const std::optional<double>& v) -> Cell {
    if (v) return *v;
    return std::string();
  };
  for (const auto& s : report.per_source) row.push_back(optional_cell(s.half_width));
  row.push_back(optional_cell(report.system_half_width));
  return row;
}

SimConfig base_sim_config(const ExperimentConfig& cfg,
                          const std::vector<SourceConfig>& sources) {
  SimConfig sim;
  sim.services = make_services(sources);
  sim.horizon_events = cfg.simulation.events;
  sim.horizon_time = cfg.simulation.horizon_time;
  sim.warmup_fraction = cfg.simulation.warmup;
  sim.seed = cfg.simulation.seed;
  sim.replications = cfg.simulation.replications;
  return sim;
}

// Runs rows_for(point) for every sweep point and concatenates in grid order.
template <class RowsFor>
Table collect(const ExperimentConfig& cfg, const std::string& name, RowsFor&& rows_for) {
  Table table = result_table(cfg, name);
  const auto points = sweep_points(cfg);
  std::vector<std::vector<std::vector<Cell>>> per_point(points.size());
  parallel_for(points.size(), [&](std::size_t i) { per_point[i] = rows_for(points[i]); });
  for (auto& rows : per_point) {
    for (auto& row : rows) table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace

std::string PolicySpec::label() const {
  switch (kind) {
    case PolicyKind::RoundRobin: return "RR";
    case PolicyKind::CyclicOptimal: return "C-GAW*";
    case PolicyKind::ProbabilisticOptimal: return "P-GAW*";
    case PolicyKind::InsertionSearch: return "IS";
    case PolicyKind::ExhaustiveSearch: return "ES";
    case PolicyKind::FixedPattern: return "pattern";
    case PolicyKind::FixedProbabilities: return "probabilities";
    case PolicyKind::LcfsW: return "LCFS-W";
    case PolicyKind::Sps: return "SPS";
    case PolicyKind::PatternReplacement: return "PR";
    case PolicyKind::RaSbOptimal: return "RA-SB*";
    case PolicyKind::RaSbFixed: return "RA-SB";
  }
  return "?";
}

bool PolicySpec::random_arrival() const {
  switch (kind) {
    case PolicyKind::LcfsW:
    case PolicyKind::Sps:
    case PolicyKind::PatternReplacement:
    case PolicyKind::RaSbOptimal:
    case PolicyKind::RaSbFixed:
      return true;
    default:
      return false;
  }
}

std::vector<SourceConfig> sources_at(const ExperimentConfig& cfg, std::optional<double> x) {
  auto sources = cfg.sources;
  if (!x || !cfg.sweep || cfg.sweep->variable == "load") return sources;
  const auto& var = cfg.sweep->variable;
  const auto colon = var.find(':');
  const std::string name = var.substr(0, colon);
  auto& s = sources.at(std::stoul(var.substr(colon + 1)) - 1);
  if (name == "mean") {
    if (!(*x > 0.0)) throw Error(ErrorKind::Config, "sweep value for " + var + " must be positive");
    s.mean = *x;
  } else if (name == "scv") {
    if (!(*x >= 0.0)) throw Error(ErrorKind::Config, "sweep value for " + var + " must be nonnegative");
    s.scv = *x;
  } else if (name == "second_moment") {
    const double scv = *x / (s.mean * s.mean) - 1.0;
    if (scv < -1e-12) {
      throw Error(ErrorKind::Config, "sweep value for " + var + " is below the squared mean");
    }
    s.scv = std::max(0.0, scv);
  } else {
    if (!(*x >= 0.0)) throw Error(ErrorKind::Config, "sweep value for " + var + " must be nonnegative");
    s.weight = *x;
  }
  return sources;
}

SystemSpec make_system(const std::vector<SourceConfig>& sources) {
  std::vector<SourceSpec> specs;
  for (const auto& s : sources) specs.push_back(SourceSpec::from_scv(s.weight, s.mean, s.scv));
  return SystemSpec(std::move(specs));
}

std::vector<DistSpec> make_services(const std::vector<SourceConfig>& sources) {
  std::vector<DistSpec> out;
  for (const auto& s : sources) {
    out.push_back(s.family ? DistSpec::make(*s.family, s.mean, s.scv)
                           : DistSpec::matching(s.mean, s.scv));
  }
  return out;
}

Vector arrival_rates(const ArrivalSpec& arrivals, const std::vector<SourceConfig>& sources) {
  const auto n = static_cast<Eigen::Index>(sources.size());
  Vector rates(n);
  switch (arrivals.rule) {
    case RateRule::Explicit:
      if (arrivals.rates.size() != sources.size()) {
        throw Error(ErrorKind::Config, "need one arrival rate per source");
      }
      for (Eigen::Index i = 0; i < n; ++i) rates[i] = arrivals.rates[static_cast<std::size_t>(i)];
      return rates;
    case RateRule::Equal: {
      double total_mean = 0.0;
      for (const auto& s : sources) total_mean += s.mean;
      rates.setConstant(arrivals.load / total_mean);
      return rates;
    }
    case RateRule::SqrtWeightOverMean: {
      double scale = 0.0;
      for (const auto& s : sources) scale += std::sqrt(s.weight * s.mean);
      if (!(scale > 0.0)) throw Error(ErrorKind::Config, "rates need a positive weight");
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = sources[static_cast<std::size_t>(i)];
        rates[i] = arrivals.load / scale * std::sqrt(s.weight / s.mean);
      }
      return rates;
    }
  }
  return rates;
}

std::size_t Table::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == column) return i;
  }
  throw Error(ErrorKind::InvalidArgument, "no column '" + std::string(column) + "' in " + name);
}

double Table::number(std::size_t row, std::string_view column) const {
  return std::get<double>(rows.at(row).at(column_index(column)));
}

std::vector<double> Table::numbers(std::string_view column) const {
  const std::size_t c = column_index(column);
  std::vector<double> out;
  for (const auto& row : rows) out.push_back(std::get<double>(row.at(c)));
  return out;
}

void write_csv(const Table& table, std::ostream& out) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(table.config_hash));
  out << "# config_hash=" << hash << " seed=" << table.seed << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << csv_field(table.columns[i]);
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << "\n";
  }
}

std::filesystem::path write_csv_file(const Table& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (table.name + ".csv");
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path.string());
  write_csv(table, out);
  return path;
}

Table cmd_eval(const ExperimentConfig& cfg) {
  for (const auto& p : cfg.policies) {
    if (p.random_arrival()) {
      throw Error(ErrorKind::Config, p.label() + " has no analytic model; use the simulate command");
    }
  }
  return collect(cfg, cfg.output.empty() ? "eval" : cfg.output, [&](std::optional<double> x) {
    const auto sources = sources_at(cfg, x);
    const SystemSpec sys = make_system(sources);
    std::vector<std::vector<Cell>> rows;
    for (const auto& policy : cfg.policies) {
      const auto resolved = resolve_gaw(policy, sys, cfg.search);
      rows.push_back(result_row(x, policy, resolved.detail, resolved.analytic));
    }
    return rows;
  });
}

Table cmd_simulate(const ExperimentConfig& cfg) {
  return collect(cfg, cfg.output.empty() ? "simulate" : cfg.output, [&](std::optional<double> x) {
    const auto sources = sources_at(cfg, x);
    const SystemSpec sys = make_system(sources);
    SimConfig sim = base_sim_config(cfg, sources);
    std::vector<std::vector<Cell>> rows;
    for (const auto& policy : cfg.policies) {
      std::string detail;
      if (!policy.random_arrival()) {
        auto resolved = resolve_gaw(policy, sys, cfg.search);
        detail = resolved.detail;
        if (auto* p = std::get_if<Pattern>(&resolved.schedule)) {
          sim.mode = GawCyclic{*p};
        } else {
          sim.mode = GawProbabilistic{std::get<ProbVector>(resolved.schedule)};
        }
        rows.push_back(result_row(x, policy, detail, simulate_gaw(sim, sys)));
        continue;
      }

      ArrivalSpec arrivals = *cfg.arrivals;
      if (x && cfg.sweep->variable == "load") arrivals.load = *x;
      RandomArrival ra{arrival_rates(arrivals, sources), LcfsW{}};
      switch (policy.kind) {
        case PolicyKind::LcfsW:
          break;
        case PolicyKind::Sps:
          ra.policy = Sps{};
          break;
        case PolicyKind::PatternReplacement: {
          const auto pr = PatternReplacement::from_optimum(solve_theorem1(sys));
          ra.policy = pr;
          detail = "n'=" + std::to_string(pr.n_prime) + " K*=" + std::to_string(pr.k_star);
          break;
        }
        case PolicyKind::RaSbFixed:
          ra.policy = RaSingleBuffer{policy.replace};
          break;
        case PolicyKind::RaSbOptimal: {
          SimConfig probe = sim;
          probe.mode = ra;
          probe.horizon_events = cfg.search.ra_sb_events;
          probe.horizon_time.reset();
          probe.replications = cfg.search.ra_sb_replications;
          probe.seed = split_seed(cfg.simulation.seed, 0x5b);
          const auto best = search_ra_sb(probe, sys, cfg.search.ra_sb_step);
          ra.policy = RaSingleBuffer::pair(best.p12, best.p21);
          detail = "p12=" + short_number(best.p12) + " p21=" + short_number(best.p21);
          break;
        }
        default:
          break;
      }
      sim.mode = ra;
      rows.push_back(result_row(x, policy, detail, simulate_ra(sim, sys)));
    }
    return rows;
  });
}

std::string cmd_optimize(const ExperimentConfig& cfg) {
  std::vector<PolicySpec> optimizers;
  for (const auto& p : cfg.policies) {
    if (p.kind == PolicyKind::CyclicOptimal || p.kind == PolicyKind::ProbabilisticOptimal ||
        p.kind == PolicyKind::InsertionSearch || p.kind == PolicyKind::ExhaustiveSearch) {
      optimizers.push_back(p);
    }
  }
  if (optimizers.empty()) {
    if (cfg.sources.size() == 2) optimizers.push_back({PolicyKind::CyclicOptimal, {}, {}, {}});
    optimizers.push_back({PolicyKind::InsertionSearch, {}, {}, {}});
    optimizers.push_back({PolicyKind::ProbabilisticOptimal, {}, {}, {}});
  }

  std::ostringstream out;
  for (const auto& x : sweep_points(cfg)) {
    const SystemSpec sys = make_system(sources_at(cfg, x));
    if (x) out << "== " << cfg.sweep->variable << " = " << short_number(*x) << " ==\n";
    out << "system: N = " << sys.size() << ", weights " << format_vector(sys.weights())
        << ", means " << format_vector(sys.means()) << ", second moments "
        << format_vector(sys.second_moments()) << "\n";
    for (const auto& p : optimizers) {
      switch (p.kind) {
        case PolicyKind::CyclicOptimal: {
          const auto r = solve_theorem1(sys);
          out << "C-GAW*: policy (" << r.policy.k1() << "," << r.policy.k2() << "), "
              << to_string(r.branch) << ", n' = " << r.n_prime()
              << ", K*_n' = " << r.k_n_prime() << "\n"
              << "  pattern " << r.pattern().to_string() << "\n"
              << "  psi1 = " << short_number(r.psi1) << ", psi2 = " << short_number(r.psi2)
              << ", x* = " << (r.x_star ? short_number(*r.x_star) : "undefined")
              << ", y* = " << (r.y_star ? short_number(*r.y_star) : "undefined") << "\n"
              << "  per-source AoI (" << short_number(r.per_source.source1) << ", "
              << short_number(r.per_source.source2) << ")\n"
              << "  system AoI " << short_number(r.system_aoi) << "\n";
          break;
        }
        case PolicyKind::ProbabilisticOptimal: {
          const auto r = sys.size() == 2 ? optimize_pgaw_two(sys) : optimize_pgaw_multi(sys);
          out << "P-GAW*: p = " << format_vector(r.p.values()) << "\n"
              << "  system AoI " << short_number(r.system_aoi) << "\n";
          break;
        }
        case PolicyKind::InsertionSearch: {
          std::optional<std::size_t> kmax;
          if (cfg.search.kmax) kmax = static_cast<std::size_t>(*cfg.search.kmax);
          const auto r = insertion_search(sys, kmax);
          out << "IS: " << to_string(r.trace.stop) << " at K = " << r.pattern.size() << "\n"
              << "  pattern " << r.pattern.to_string() << "\n"
              << "  system AoI " << short_number(r.system_aoi) << "\n"
              << "  trace:\n";
          for (const auto& step : r.trace.steps) {
            out << "    K = " << step.cycle_length << "  AoI " << short_number(step.system_aoi)
                << "  evaluated " << step.evaluations << "  " << step.pattern.to_string()
                << "\n";
          }
          break;
        }
        case PolicyKind::ExhaustiveSearch: {
          const auto r = exhaustive_search(sys, static_cast<std::size_t>(cfg.search.es_cap));
          out << "ES (K <= " << cfg.search.es_cap << "): pattern " << r.pattern.to_string()
              << "\n  system AoI " << short_number(r.system_aoi) << ", "
              << r.patterns_evaluated << " patterns evaluated\n";
          break;
        }
        default:
          break;
      }
    }
  }
  return out.str();
}

}  // namespace aoi
