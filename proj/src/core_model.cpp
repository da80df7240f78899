#include "aoi/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aoi {

namespace {

constexpr double kMomentSlack = 1e-12;

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

SourceSpec::SourceSpec(double weight, double mean, double second_moment)
    : weight_(weight), mean_(mean), second_moment_(second_moment) {
  if (!std::isfinite(weight) || weight < 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "source weight must be finite and nonnegative, got " +
                    fmt_double(weight));
  }
  if (!std::isfinite(mean) || mean <= 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "mean service time must be positive, got " + fmt_double(mean));
  }
  if (!std::isfinite(second_moment) ||
      second_moment < mean * mean * (1.0 - kMomentSlack)) {
    throw Error(ErrorKind::InvalidArgument,
                "second moment " + fmt_double(second_moment) +
                    " is below the squared mean " + fmt_double(mean * mean));
  }
  // Snap rounding-level negative variances to zero.
  second_moment_ = std::max(second_moment_, mean_ * mean_);
}

SourceSpec SourceSpec::from_scv(double weight, double mean, double scv) {
  if (!std::isfinite(scv) || scv < 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "scv must be nonnegative, got " + fmt_double(scv));
  }
  return SourceSpec(weight, mean, mean * mean * (1.0 + scv));
}

SystemSpec::SystemSpec(std::vector<SourceSpec> sources)
    : sources_(std::move(sources)) {
  if (sources_.empty()) {
    throw Error(ErrorKind::InvalidArgument, "system needs at least one source");
  }
  const auto n = static_cast<Eigen::Index>(sources_.size());
  weights_.resize(n);
  means_.resize(n);
  second_moments_.resize(n);
  variances_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& src = sources_[static_cast<std::size_t>(i)];
    weights_[i] = src.weight();
    means_[i] = src.mean();
    second_moments_[i] = src.second_moment();
    variances_[i] = src.variance();
  }
  if (!(weights_.array() > 0.0).any()) {
    throw Error(ErrorKind::DegenerateWeights,
                "at least one source must have a positive weight");
  }
}

const SourceSpec& SystemSpec::source(int n) const {
  check_source(n);
  return sources_[static_cast<std::size_t>(n - 1)];
}

void SystemSpec::check_source(int n) const {
  if (n < 1 || static_cast<std::size_t>(n) > sources_.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "source " + std::to_string(n) + " out of range 1.." +
                    std::to_string(sources_.size()));
  }
}

SystemSpec SystemSpec::swapped_pair() const {
  if (sources_.size() != 2) {
    throw Error(ErrorKind::InvalidArgument, "swapped_pair needs N = 2");
  }
  return SystemSpec({sources_[1], sources_[0]});
}

Pattern::Pattern(std::vector<int> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw Error(ErrorKind::InvalidPattern, "pattern must not be empty");
  }
  for (int e : entries_) {
    if (e < 1) {
      throw Error(ErrorKind::InvalidPattern,
                  "pattern entry " + std::to_string(e) + " is not a source label");
    }
  }
}

std::vector<int> Pattern::counts(std::size_t num_sources) const {
  std::vector<int> alpha(num_sources, 0);
  for (int e : entries_) {
    if (static_cast<std::size_t>(e) <= num_sources) ++alpha[static_cast<std::size_t>(e - 1)];
  }
  return alpha;
}

int Pattern::count(int source) const {
  return static_cast<int>(std::count(entries_.begin(), entries_.end(), source));
}

bool Pattern::is_feasible(std::size_t num_sources) const {
  if (static_cast<std::size_t>(max_label()) > num_sources) return false;
  return missing_sources(num_sources).empty();
}

std::vector<int> Pattern::missing_sources(std::size_t num_sources) const {
  const auto alpha = counts(num_sources);
  std::vector<int> missing;
  for (std::size_t n = 0; n < num_sources; ++n) {
    if (alpha[n] == 0) missing.push_back(static_cast<int>(n + 1));
  }
  return missing;
}

int Pattern::max_label() const {
  return *std::max_element(entries_.begin(), entries_.end());
}

Pattern Pattern::rotated(std::size_t k) const {
  std::vector<int> out(entries_.size());
  const std::size_t len = entries_.size();
  for (std::size_t i = 0; i < len; ++i) out[i] = entries_[(i + k) % len];
  return Pattern(std::move(out));
}

Pattern Pattern::repeated(std::size_t times) const {
  std::vector<int> out;
  out.reserve(entries_.size() * times);
  for (std::size_t t = 0; t < times; ++t) {
    out.insert(out.end(), entries_.begin(), entries_.end());
  }
  return Pattern(std::move(out));
}

std::string Pattern::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(entries_[i]);
  }
  return s + "]";
}

PatternMoments pattern_moments(std::span<const int> entries,
                               const SystemSpec& sys) {
  PatternMoments m;
  for (int e : entries) {
    sys.check_source(e);
    m.mean += sys.means()[e - 1];
    m.variance += sys.variances()[e - 1];
  }
  m.second_moment = m.variance + m.mean * m.mean;
  return m;
}

PatternMoments pattern_moments(const Pattern& pattern, const SystemSpec& sys) {
  if (static_cast<std::size_t>(pattern.max_label()) > sys.size()) {
    throw Error(ErrorKind::InvalidPattern,
                "pattern " + pattern.to_string() + " references source " +
                    std::to_string(pattern.max_label()) + " but N = " +
                    std::to_string(sys.size()));
  }
  return pattern_moments(std::span<const int>(pattern.entries()), sys);
}

namespace {

double checked_denominator(const MomentPair& own, const MomentPair& gap) {
  const double denom = 2.0 * (own.mean + gap.mean);
  if (!(own.mean > 0.0) || gap.mean < 0.0 || !(denom > 0.0) ||
      !std::isfinite(denom)) {
    throw Error(ErrorKind::Domain,
                "mean AoI needs a positive own mean and a nonnegative gap mean");
  }
  return denom;
}

}  // namespace

double mean_aoi_from_moments(const MomentPair& own, const MomentPair& gap) {
  const double denom = checked_denominator(own, gap);
  const double s = own.mean;
  const double st = gap.mean;
  return (2.0 * s * s + 4.0 * s * st + own.second_moment + gap.second_moment) /
         denom;
}

double mean_aoi_variance_form(const MomentPair& own, const MomentPair& gap) {
  const double denom = checked_denominator(own, gap);
  const double s = own.mean;
  const double st = gap.mean;
  return ((3.0 * s + st) * (s + st) + own.variance() + gap.variance()) / denom;
}

double mean_aoi_scv_form(const MomentPair& own, const MomentPair& gap) {
  const double denom = checked_denominator(own, gap);
  if (!(gap.mean > 0.0)) {
    throw Error(ErrorKind::Domain, "scv form needs a positive gap mean");
  }
  const double s = own.mean;
  const double st = gap.mean;
  return (s * s * (own.scv() + 3.0) + st * st * (gap.scv() + 1.0) +
          4.0 * s * st) /
         denom;
}

double system_aoi(const Vector& per_source, const SystemSpec& sys) {
  if (static_cast<std::size_t>(per_source.size()) != sys.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "expected " + std::to_string(sys.size()) +
                    " per-source values, got " +
                    std::to_string(per_source.size()));
  }
  return sys.weights().dot(per_source);
}

double system_aoi(std::span<const double> per_source, const SystemSpec& sys) {
  return system_aoi(
      Vector(Eigen::Map<const Vector>(per_source.data(),
                                      static_cast<Eigen::Index>(per_source.size()))),
      sys);
}

Vector AoiReport::means() const {
  Vector v(static_cast<Eigen::Index>(per_source.size()));
  for (std::size_t i = 0; i < per_source.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = per_source[i].mean;
  }
  return v;
}

AoiReport make_analytic_report(const Vector& per_source, const SystemSpec& sys) {
  AoiReport report;
  report.method = Method::Analytic;
  report.system_aoi = system_aoi(per_source, sys);
  for (Eigen::Index i = 0; i < per_source.size(); ++i) {
    report.per_source.push_back({static_cast<int>(i + 1), per_source[i], {}, {}});
  }
  return report;
}

const char* to_string(Method method) {
  return method == Method::Analytic ? "analytic" : "simulated";
}

}  // namespace aoi
