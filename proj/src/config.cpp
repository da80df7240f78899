#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aoi/error.hpp"
#include "aoi/experiments.hpp"

namespace aoi {

namespace {

using json = nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw Error(ErrorKind::Config, origin_ + ": " + path + ": " + message);
  }

  void allow_keys(const json& object, const std::string& path,
                  std::initializer_list<std::string_view> allowed) const {
    if (!object.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : object.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(path.empty() ? key : path + "." + key, "unknown field");
      }
    }
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  double positive(const json& j, const std::string& path) const {
    const double v = number(j, path);
    if (!(v > 0.0)) fail(path, "must be positive");
    return v;
  }

  double nonnegative(const json& j, const std::string& path) const {
    const double v = number(j, path);
    if (!(v >= 0.0)) fail(path, "must be nonnegative");
    return v;
  }

  std::uint64_t unsigned_integer(const json& j, const std::string& path) const {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const double v = number(j, path);
    if (v < 0.0 || std::floor(v) != v || v > 1.8e19) fail(path, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }

  int positive_int(const json& j, const std::string& path) const {
    const std::uint64_t v = unsigned_integer(j, path);
    if (v < 1 || v > 1'000'000'000) fail(path, "expected a positive integer");
    return static_cast<int>(v);
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  std::vector<double> numbers(const json& j, const std::string& path) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

 private:
  std::string origin_;
};

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

SourceConfig read_source(const Reader& r, const json& j, const std::string& path) {
  r.allow_keys(j, path, {"weight", "mean", "scv", "second_moment", "family"});
  SourceConfig s;
  if (!j.contains("weight")) r.fail(path, "missing field 'weight'");
  if (!j.contains("mean")) r.fail(path, "missing field 'mean'");
  s.weight = r.nonnegative(j["weight"], path + ".weight");
  s.mean = r.positive(j["mean"], path + ".mean");
  if (j.contains("family")) {
    try {
      s.family = parse_family(r.string(j["family"], path + ".family"));
    } catch (const Error& e) {
      r.fail(path + ".family", e.what());
    }
  }
  if (j.contains("scv") && j.contains("second_moment")) {
    r.fail(path, "give either 'scv' or 'second_moment', not both");
  }
  if (j.contains("scv")) {
    s.scv = r.nonnegative(j["scv"], path + ".scv");
  } else if (j.contains("second_moment")) {
    const double q = r.positive(j["second_moment"], path + ".second_moment");
    const double scv = q / (s.mean * s.mean) - 1.0;
    if (scv < -1e-12) r.fail(path + ".second_moment", "must be at least mean squared");
    s.scv = std::max(0.0, scv);
  } else if (s.family == Family::Deterministic) {
    s.scv = 0.0;
  } else if (s.family == Family::Exponential) {
    s.scv = 1.0;
  } else {
    r.fail(path, "missing 'scv' or 'second_moment'");
  }
  if (s.family) {
    try {
      DistSpec::make(*s.family, s.mean, s.scv);
    } catch (const Error& e) {
      r.fail(path, e.what());
    }
  }
  return s;
}

PolicySpec read_policy(const Reader& r, const json& j, const std::string& path,
                       std::size_t n) {
  PolicySpec p;
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "RR") {
      p.kind = PolicyKind::RoundRobin;
    } else if (name == "C-GAW*") {
      p.kind = PolicyKind::CyclicOptimal;
    } else if (name == "P-GAW*") {
      p.kind = PolicyKind::ProbabilisticOptimal;
    } else if (name == "IS") {
      p.kind = PolicyKind::InsertionSearch;
    } else if (name == "ES") {
      p.kind = PolicyKind::ExhaustiveSearch;
    } else if (name == "LCFS-W") {
      p.kind = PolicyKind::LcfsW;
    } else if (name == "SPS") {
      p.kind = PolicyKind::Sps;
    } else if (name == "PR") {
      p.kind = PolicyKind::PatternReplacement;
    } else if (name == "RA-SB*") {
      p.kind = PolicyKind::RaSbOptimal;
    } else {
      r.fail(path, "unknown policy '" + name + "'");
    }
  } else if (j.is_object() && j.size() == 1 && j.contains("pattern")) {
    p.kind = PolicyKind::FixedPattern;
    const json& a = j["pattern"];
    if (!a.is_array() || a.empty()) r.fail(path + ".pattern", "expected a nonempty array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number_integer()) r.fail(at(path + ".pattern", i), "expected a source label");
      p.pattern.push_back(a[i].get<int>());
    }
  } else if (j.is_object() && j.size() == 1 && j.contains("probabilities")) {
    p.kind = PolicyKind::FixedProbabilities;
    p.probabilities = r.numbers(j["probabilities"], path + ".probabilities");
    if (p.probabilities.size() != n) r.fail(path + ".probabilities", "need one entry per source");
  } else if (j.is_object() && j.size() == 1 && j.contains("ra_sb")) {
    p.kind = PolicyKind::RaSbFixed;
    const json& m = j["ra_sb"];
    if (!m.is_array() || m.size() != n) r.fail(path + ".ra_sb", "expected an N x N matrix");
    p.replace.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = r.numbers(m[i], at(path + ".ra_sb", i));
      if (row.size() != n) r.fail(at(path + ".ra_sb", i), "expected N entries");
      for (std::size_t k = 0; k < n; ++k) {
        const double v = row[k];
        if (v < 0.0 || v > 1.0) r.fail(at(at(path + ".ra_sb", i), k), "must lie in [0, 1]");
        if (i == k && v != 1.0) r.fail(at(at(path + ".ra_sb", i), k), "diagonal must be 1");
        p.replace(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
      }
    }
  } else {
    r.fail(path, "expected a policy name or one of {pattern}, {probabilities}, {ra_sb}");
  }

  const bool two_only = p.kind == PolicyKind::CyclicOptimal ||
                        p.kind == PolicyKind::PatternReplacement ||
                        p.kind == PolicyKind::RaSbOptimal;
  if (two_only && n != 2) {
    r.fail(path, p.label() + " is defined for two sources" +
                     (p.kind == PolicyKind::CyclicOptimal ? "; use IS for N > 2" : ""));
  }
  return p;
}

void check_variable(const Reader& r, const std::string& variable, std::size_t n,
                    const std::string& path) {
  if (variable == "load") return;
  const auto colon = variable.find(':');
  const std::string name = variable.substr(0, colon);
  if (colon == std::string::npos ||
      (name != "mean" && name != "scv" && name != "second_moment" && name != "weight")) {
    r.fail(path, "expected mean:n, scv:n, second_moment:n, weight:n or load");
  }
  std::size_t index = 0;
  try {
    index = std::stoul(variable.substr(colon + 1));
  } catch (const std::exception&) {
    r.fail(path, "bad source index in '" + variable + "'");
  }
  if (index < 1 || index > n) r.fail(path, "source index out of range in '" + variable + "'");
}

SweepSpec read_sweep(const Reader& r, const json& j, std::size_t n) {
  r.allow_keys(j, "sweep", {"variable", "grid", "from", "to", "step"});
  SweepSpec s;
  if (!j.contains("variable")) r.fail("sweep", "missing field 'variable'");
  s.variable = r.string(j["variable"], "sweep.variable");
  check_variable(r, s.variable, n, "sweep.variable");
  if (j.contains("grid")) {
    if (j.contains("from") || j.contains("to") || j.contains("step")) {
      r.fail("sweep", "give either 'grid' or 'from'/'to'/'step'");
    }
    s.grid = r.numbers(j["grid"], "sweep.grid");
  } else {
    if (!j.contains("from") || !j.contains("to") || !j.contains("step")) {
      r.fail("sweep", "need 'grid' or all of 'from', 'to', 'step'");
    }
    const double from = r.number(j["from"], "sweep.from");
    const double to = r.number(j["to"], "sweep.to");
    const double step = r.positive(j["step"], "sweep.step");
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
    if (count < 1 || count > 1'000'000) r.fail("sweep", "range gives no grid points");
    for (long i = 0; i < count; ++i) s.grid.push_back(from + static_cast<double>(i) * step);
  }
  for (std::size_t i = 1; i < s.grid.size(); ++i) {
    if (!(s.grid[i] > s.grid[i - 1])) r.fail(at("sweep.grid", i), "grid must be strictly increasing");
  }
  return s;
}

ArrivalSpec read_arrivals(const Reader& r, const json& j, std::size_t n) {
  r.allow_keys(j, "arrivals", {"rates", "load", "rule"});
  ArrivalSpec a;
  if (j.contains("rates")) {
    if (j.contains("load") || j.contains("rule")) {
      r.fail("arrivals", "give either 'rates' or 'load' with 'rule'");
    }
    a.rule = RateRule::Explicit;
    a.rates = r.numbers(j["rates"], "arrivals.rates");
    if (a.rates.size() != n) r.fail("arrivals.rates", "need one rate per source");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(a.rates[i] > 0.0)) r.fail(at("arrivals.rates", i), "must be positive");
    }
    return a;
  }
  if (!j.contains("load")) r.fail("arrivals", "need 'rates' or 'load'");
  a.load = r.positive(j["load"], "arrivals.load");
  const std::string rule = j.contains("rule") ? r.string(j["rule"], "arrivals.rule") : "equal";
  if (rule == "equal") {
    a.rule = RateRule::Equal;
  } else if (rule == "sqrt-weight-over-mean") {
    a.rule = RateRule::SqrtWeightOverMean;
  } else {
    r.fail("arrivals.rule", "expected 'equal' or 'sqrt-weight-over-mean'");
  }
  return a;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig parse_config(std::string_view text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    std::string message = e.what();
    if (const auto pos = message.find("syntax error"); pos != std::string::npos) {
      message = message.substr(pos);
    }
    throw Error(ErrorKind::Config, origin + ":" + std::to_string(line) + ":" +
                                       std::to_string(column) + ": " + message);
  }

  const Reader r(origin);
  r.allow_keys(root, "", {"sources", "policies", "sweep", "arrivals", "simulation", "search", "output"});
  ExperimentConfig cfg;
  cfg.hash = fnv1a(text);

  if (!root.contains("sources")) r.fail("sources", "missing");
  const json& sources = root["sources"];
  if (!sources.is_array() || sources.empty()) r.fail("sources", "expected a nonempty array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    cfg.sources.push_back(read_source(r, sources[i], at("sources", i)));
  }
  const std::size_t n = cfg.sources.size();
  if (std::none_of(cfg.sources.begin(), cfg.sources.end(),
                   [](const SourceConfig& s) { return s.weight > 0.0; })) {
    r.fail("sources", "at least one weight must be positive");
  }

  if (root.contains("policies")) {
    const json& policies = root["policies"];
    if (!policies.is_array() || policies.empty()) r.fail("policies", "expected a nonempty array");
    for (std::size_t i = 0; i < policies.size(); ++i) {
      cfg.policies.push_back(read_policy(r, policies[i], at("policies", i), n));
    }
  } else {
    cfg.policies.push_back({PolicyKind::RoundRobin, {}, {}, {}});
    cfg.policies.push_back(
        {n == 2 ? PolicyKind::CyclicOptimal : PolicyKind::InsertionSearch, {}, {}, {}});
    cfg.policies.push_back({PolicyKind::ProbabilisticOptimal, {}, {}, {}});
  }

  if (root.contains("arrivals")) cfg.arrivals = read_arrivals(r, root["arrivals"], n);
  if (root.contains("sweep")) {
    cfg.sweep = read_sweep(r, root["sweep"], n);
    if (cfg.sweep->variable == "load" && (!cfg.arrivals || cfg.arrivals->rule == RateRule::Explicit)) {
      r.fail("sweep.variable", "a load sweep needs arrivals given by 'load' and 'rule'");
    }
  }
  for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
    if (cfg.policies[i].random_arrival() && !cfg.arrivals) {
      r.fail(at("policies", i), cfg.policies[i].label() + " needs an 'arrivals' section");
    }
  }

  if (root.contains("simulation")) {
    const json& s = root["simulation"];
    r.allow_keys(s, "simulation", {"events", "horizon_time", "warmup", "replications", "seed"});
    if (s.contains("events")) cfg.simulation.events = r.unsigned_integer(s["events"], "simulation.events");
    if (s.contains("horizon_time")) {
      cfg.simulation.horizon_time = r.positive(s["horizon_time"], "simulation.horizon_time");
    }
    if (s.contains("warmup")) {
      cfg.simulation.warmup = r.nonnegative(s["warmup"], "simulation.warmup");
      if (cfg.simulation.warmup >= 1.0) r.fail("simulation.warmup", "must be below 1");
    }
    if (s.contains("replications")) {
      cfg.simulation.replications = r.positive_int(s["replications"], "simulation.replications");
    }
    if (s.contains("seed")) cfg.simulation.seed = r.unsigned_integer(s["seed"], "simulation.seed");
  }

  if (root.contains("search")) {
    const json& s = root["search"];
    r.allow_keys(s, "search", {"kmax", "es_cap", "ra_sb_step", "ra_sb_events", "ra_sb_replications"});
    if (s.contains("kmax")) cfg.search.kmax = r.positive_int(s["kmax"], "search.kmax");
    if (s.contains("es_cap")) cfg.search.es_cap = r.positive_int(s["es_cap"], "search.es_cap");
    if (s.contains("ra_sb_step")) {
      cfg.search.ra_sb_step = r.positive(s["ra_sb_step"], "search.ra_sb_step");
      if (cfg.search.ra_sb_step > 1.0) r.fail("search.ra_sb_step", "must be at most 1");
    }
    if (s.contains("ra_sb_events")) {
      cfg.search.ra_sb_events = r.unsigned_integer(s["ra_sb_events"], "search.ra_sb_events");
    }
    if (s.contains("ra_sb_replications")) {
      cfg.search.ra_sb_replications =
          r.positive_int(s["ra_sb_replications"], "search.ra_sb_replications");
    }
  }

  if (root.contains("output")) cfg.output = r.string(root["output"], "output");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

}  // namespace aoi
