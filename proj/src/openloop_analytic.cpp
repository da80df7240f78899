#include "aoi/openloop_analytic.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace aoi {

namespace {

constexpr double kMinProbability = 1e-12;
constexpr double kSumTolerance = 1e-9;

}  // namespace

ProbVector::ProbVector(Vector p) : p_(std::move(p)) {
  if (p_.size() == 0) {
    throw Error(ErrorKind::InvalidArgument, "probability vector is empty");
  }
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_[i]) || p_[i] < kMinProbability) {
      throw Error(ErrorKind::UnboundedAge,
                  "transmission probability of source " + std::to_string(i + 1) +
                      " is not positive; its age is unbounded");
    }
  }
  if (std::abs(p_.sum() - 1.0) > kSumTolerance) {
    throw Error(ErrorKind::InvalidArgument,
                "transmission probabilities must sum to one");
  }
}

ProbVector::ProbVector(std::initializer_list<double> p)
    : ProbVector(Vector(Eigen::Map<const Vector>(
          p.begin(), static_cast<Eigen::Index>(p.size())))) {}

ProbVector ProbVector::uniform(std::size_t n) {
  return ProbVector(Vector::Constant(static_cast<Eigen::Index>(n),
                                     1.0 / static_cast<double>(n)));
}

MomentPair pgaw_gap_moments(const ProbVector& p, const SystemSpec& sys, int n) {
  sys.check_source(n);
  if (p.size() != sys.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "probability vector length does not match the source count");
  }
  const Vector& pv = p.values();
  const double pn = pv[n - 1];
  const double other_mean = pv.dot(sys.means()) - pn * sys.means()[n - 1];
  const double other_q =
      pv.dot(sys.second_moments()) - pn * sys.second_moments()[n - 1];
  return {other_mean / pn,
          other_q / pn + 2.0 * other_mean * other_mean / (pn * pn)};
}

AoiReport pgaw_aoi(const ProbVector& p, const SystemSpec& sys) {
  Vector aoi(static_cast<Eigen::Index>(sys.size()));
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    const MomentPair own{sys.means()[n - 1], sys.second_moments()[n - 1]};
    aoi[n - 1] = mean_aoi_from_moments(own, pgaw_gap_moments(p, sys, n));
  }
  return make_analytic_report(aoi, sys);
}

double pgaw_system_aoi(const ProbVector& p, const SystemSpec& sys) {
  return pgaw_aoi(p, sys).system_aoi;
}

void require_feasible(const Pattern& pattern, const SystemSpec& sys) {
  if (static_cast<std::size_t>(pattern.max_label()) > sys.size()) {
    throw Error(ErrorKind::InvalidPattern,
                "pattern " + pattern.to_string() + " references source " +
                    std::to_string(pattern.max_label()) + " but N = " +
                    std::to_string(sys.size()));
  }
  const auto missing = pattern.missing_sources(sys.size());
  if (!missing.empty()) {
    std::string names;
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i) names += ", ";
      names += std::to_string(missing[i]);
    }
    throw Error(ErrorKind::Infeasible, "pattern " + pattern.to_string() +
                                           " never serves source(s) " + names);
  }
}

std::vector<Subpattern> subpatterns(const Pattern& pattern, int n) {
  const std::size_t len = pattern.size();
  std::size_t first = len;
  for (std::size_t i = 0; i < len; ++i) {
    if (pattern[i] == n) {
      first = i;
      break;
    }
  }
  if (first == len) {
    throw Error(ErrorKind::Infeasible, "source " + std::to_string(n) +
                                           " does not appear in pattern " +
                                           pattern.to_string());
  }
  std::vector<Subpattern> out;
  Subpattern current;
  for (std::size_t step = 1; step <= len; ++step) {
    const int e = pattern[(first + step) % len];
    if (e == n) {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(e);
    }
  }
  return out;
}

namespace {

// Walks the pattern once starting just after the first appearance of n;
// assumes labels are in range. Empty when n never appears.
std::optional<MomentPair> gap_moments_unchecked(const std::vector<int>& entries,
                                                const Vector& means,
                                                const Vector& variances, int n) {
  const std::size_t len = entries.size();
  std::size_t first = 0;
  while (first < len && entries[first] != n) ++first;
  if (first == len) return std::nullopt;

  double sum_mean = 0.0;
  double sum_q = 0.0;
  double seg_mean = 0.0;
  double seg_var = 0.0;
  int alpha = 0;
  std::size_t i = first;
  for (std::size_t step = 0; step < len; ++step) {
    if (++i == len) i = 0;
    const int e = entries[i];
    if (e == n) {
      sum_mean += seg_mean;
      sum_q += seg_var + seg_mean * seg_mean;
      seg_mean = 0.0;
      seg_var = 0.0;
      ++alpha;
    } else {
      seg_mean += means[e - 1];
      seg_var += variances[e - 1];
    }
  }
  return MomentPair{sum_mean / alpha, sum_q / alpha};
}

// Per-source mean ages without temporaries; fn(i, age) for i = 0..N-1.
template <class Fn>
void for_each_source_aoi(const Pattern& pattern, const SystemSpec& sys, Fn&& fn) {
  if (static_cast<std::size_t>(pattern.max_label()) > sys.size()) {
    require_feasible(pattern, sys);
  }
  const auto& means = sys.means();
  const auto& q = sys.second_moments();
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const auto gap = gap_moments_unchecked(pattern.entries(), means, sys.variances(),
                                           static_cast<int>(i + 1));
    if (!gap) require_feasible(pattern, sys);
    fn(i, mean_aoi_from_moments({means[i], q[i]}, *gap));
  }
}

}  // namespace

MomentPair cgaw_gap_moments(const Pattern& pattern, const SystemSpec& sys,
                            int n) {
  sys.check_source(n);
  require_feasible(pattern, sys);
  return *gap_moments_unchecked(pattern.entries(), sys.means(), sys.variances(),
                                n);
}

Vector cgaw_source_aoi(const Pattern& pattern, const SystemSpec& sys) {
  Vector aoi(static_cast<Eigen::Index>(sys.size()));
  for_each_source_aoi(pattern, sys, [&](Eigen::Index i, double a) { aoi[i] = a; });
  return aoi;
}

AoiReport cgaw_aoi(const Pattern& pattern, const SystemSpec& sys) {
  return make_analytic_report(cgaw_source_aoi(pattern, sys), sys);
}

double cgaw_system_aoi(const Pattern& pattern, const SystemSpec& sys) {
  double total = 0.0;
  for_each_source_aoi(pattern, sys,
                      [&](Eigen::Index i, double a) { total += sys.weights()[i] * a; });
  return total;
}

}  // namespace aoi
