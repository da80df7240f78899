// Command-line front end: eval, optimize, simulate, reproduce.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoi/error.hpp"
#include "aoi/experiments.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kInfeasible = 3, kBudget = 4 };

int exit_code(aoi::ErrorKind kind) {
  switch (kind) {
    case aoi::ErrorKind::Infeasible:
    case aoi::ErrorKind::InvalidPattern:
    case aoi::ErrorKind::UnboundedAge:
    case aoi::ErrorKind::DegenerateWeights:
      return kInfeasible;
    case aoi::ErrorKind::BudgetExceeded:
      return kBudget;
    default:
      return kConfig;
  }
}

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<std::uint64_t> horizon;
  std::optional<int> kmax;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
  auto* config = cmd->add_option("--config", f.config, "experiment config (JSON)");
  if (needs_config) config->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory for CSV files");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--replications", f.replications, "replications per estimate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", f.horizon, "deliveries per replication")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--kmax", f.kmax, "cycle-length cap for insertion search")
      ->check(CLI::PositiveNumber);
}

aoi::ExperimentConfig load(const Flags& f) {
  auto cfg = aoi::load_config(f.config);
  if (f.seed) cfg.simulation.seed = *f.seed;
  if (f.replications) cfg.simulation.replications = *f.replications;
  if (f.horizon) {
    cfg.simulation.events = *f.horizon;
    cfg.simulation.horizon_time.reset();
  }
  if (f.kmax) cfg.search.kmax = *f.kmax;
  return cfg;
}

void emit(const aoi::Table& table, const Flags& f) {
  if (f.out.empty()) {
    aoi::write_csv(table, std::cout);
  } else {
    std::cerr << "wrote " << aoi::write_csv_file(table, f.out).string() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information scheduling: analysis, optimization and simulation"};
  app.require_subcommand(1);

  Flags flags;
  auto* eval = app.add_subcommand("eval", "analytic AoI of the configured policies");
  add_common(eval, flags, true);
  auto* optimize = app.add_subcommand("optimize", "run the optimizers and print their reports");
  add_common(optimize, flags, true);
  auto* simulate = app.add_subcommand("simulate", "simulated AoI with confidence intervals");
  add_common(simulate, flags, true);

  auto* reproduce = app.add_subcommand("reproduce", "write the CSV tables of a figure");
  add_common(reproduce, flags, false);
  std::string figure;
  std::vector<double> grid;
  reproduce->add_option("figure", figure, "fig2, fig3, fig5a, fig5b, fig6 or all")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig5a", "fig5b", "fig6", "all"}));
  reproduce->add_option("--grid", grid, "override the sweep grid")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (eval->parsed()) {
      emit(aoi::cmd_eval(load(flags)), flags);
    } else if (simulate->parsed()) {
      emit(aoi::cmd_simulate(load(flags)), flags);
    } else if (optimize->parsed()) {
      std::cout << aoi::cmd_optimize(load(flags));
    } else {
      aoi::ReproduceOptions options;
      if (flags.seed) options.seed = *flags.seed;
      if (flags.replications) options.replications = *flags.replications;
      if (flags.horizon) options.events = *flags.horizon;
      options.kmax = flags.kmax;
      if (!grid.empty()) options.grid = grid;
      if (flags.out.empty()) flags.out = "results";
      std::vector<std::string> figures{figure};
      if (figure == "all") figures = aoi::figure_names();
      for (const auto& name : figures) {
        for (const auto& table : aoi::cmd_reproduce(name, options)) emit(table, flags);
      }
    }
  } catch (const aoi::Error& e) {
    std::cerr << "error (" << aoi::to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
