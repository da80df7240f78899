#pragma once

// Experiment configs, sweeps, and the tables behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "aoi/core_model.hpp"
#include "aoi/des.hpp"
#include "aoi/distributions.hpp"

namespace aoi {

struct SourceConfig {
  double weight = 1.0;
  double mean = 1.0;
  double scv = 1.0;
  std::optional<Family> family;  // moment-matched default when absent
};

enum class PolicyKind {
  RoundRobin,
  CyclicOptimal,       // two-source closed form
  ProbabilisticOptimal,
  InsertionSearch,
  ExhaustiveSearch,
  FixedPattern,
  FixedProbabilities,
  LcfsW,
  Sps,
  PatternReplacement,
  RaSbOptimal,         // grid-searched replacement probabilities
  RaSbFixed,
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::RoundRobin;
  std::vector<int> pattern;
  std::vector<double> probabilities;
  Eigen::MatrixXd replace;

  std::string label() const;
  bool random_arrival() const;
};

struct SweepSpec {
  /// "mean:n", "scv:n", "second_moment:n", "weight:n" or "load".
  std::string variable;
  std::vector<double> grid;
};

enum class RateRule { Explicit, Equal, SqrtWeightOverMean };

struct ArrivalSpec {
  RateRule rule = RateRule::Explicit;
  std::vector<double> rates;
  double load = 1.0;  // target sum of rate * mean for the proportional rules
};

struct SimulationSettings {
  std::uint64_t events = 1'000'000;
  std::optional<double> horizon_time;
  double warmup = 0.1;
  int replications = 30;
  std::uint64_t seed = 1;
};

struct SearchSettings {
  std::optional<int> kmax;
  int es_cap = 10;
  double ra_sb_step = 0.05;
  std::uint64_t ra_sb_events = 200'000;
  int ra_sb_replications = 1;
};

struct ExperimentConfig {
  std::vector<SourceConfig> sources;
  std::vector<PolicySpec> policies;
  std::optional<SweepSpec> sweep;
  std::optional<ArrivalSpec> arrivals;
  SimulationSettings simulation;
  SearchSettings search;
  std::string output;
  std::uint64_t hash = 0;
};

std::uint64_t fnv1a(std::string_view text);

/// Throws Error{Config} with "origin:line:column: ..." for syntax errors and
/// "origin: field.path: ..." for schema errors.
ExperimentConfig parse_config(std::string_view text, const std::string& origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sources after applying a sweep value (pass nullopt for the base point).
std::vector<SourceConfig> sources_at(const ExperimentConfig& cfg, std::optional<double> x);
SystemSpec make_system(const std::vector<SourceConfig>& sources);
std::vector<DistSpec> make_services(const std::vector<SourceConfig>& sources);
Vector arrival_rates(const ArrivalSpec& arrivals, const std::vector<SourceConfig>& sources);

using Cell = std::variant<double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  std::size_t column_index(std::string_view column) const;
  double number(std::size_t row, std::string_view column) const;
  std::vector<double> numbers(std::string_view column) const;
};

/// Comment line with hash and seed, header row, then rows.
void write_csv(const Table& table, std::ostream& out);
std::filesystem::path write_csv_file(const Table& table, const std::filesystem::path& dir);

/// Analytic evaluation: one row per (sweep point, policy).
Table cmd_eval(const ExperimentConfig& cfg);
/// Simulated evaluation with confidence half-widths.
Table cmd_simulate(const ExperimentConfig& cfg);
/// Human-readable optimization report.
std::string cmd_optimize(const ExperimentConfig& cfg);

struct ReproduceOptions {
  std::uint64_t seed = 1;
  int replications = 30;
  std::uint64_t events = 1'000'000;
  std::optional<std::vector<double>> grid;  // replaces the figure's default grid
  std::optional<int> kmax;
  std::uint64_t ra_sb_events = 200'000;
  int ra_sb_replications = 1;
};

/// "fig2", "fig3", "fig5a", "fig5b" or "fig6" (three panel tables).
std::vector<Table> cmd_reproduce(const std::string& figure, const ReproduceOptions& options);
const std::vector<std::string>& figure_names();

}  // namespace aoi
