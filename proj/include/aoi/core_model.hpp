#pragma once

// Domain types and the moment algebra shared by every scheduler.
//
// Sources are labelled 1..N everywhere in the public API (patterns, source
// arguments, reports). Per-source vectors are 0-based Eigen vectors, so
// entry n-1 belongs to source n.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aoi/error.hpp"

namespace aoi {

using Vector = Eigen::VectorXd;

/// Weight and first two service-time moments of one information source.
class SourceSpec {
 public:
  /// Throws Error{InvalidArgument} unless weight >= 0, mean > 0 and
  /// second_moment >= mean^2 (up to rounding).
  SourceSpec(double weight, double mean, double second_moment);

  static SourceSpec from_scv(double weight, double mean, double scv);

  double weight() const { return weight_; }
  double mean() const { return mean_; }
  double second_moment() const { return second_moment_; }
  double variance() const { return second_moment_ - mean_ * mean_; }
  double scv() const { return variance() / (mean_ * mean_); }

  bool operator==(const SourceSpec&) const = default;

 private:
  double weight_;
  double mean_;
  double second_moment_;
};

class SystemSpec {
 public:
  /// Requires at least one source and at least one positive weight.
  explicit SystemSpec(std::vector<SourceSpec> sources);

  std::size_t size() const { return sources_.size(); }
  const std::vector<SourceSpec>& sources() const { return sources_; }
  /// 1-based access.
  const SourceSpec& source(int n) const;

  const Vector& weights() const { return weights_; }
  const Vector& means() const { return means_; }
  const Vector& second_moments() const { return second_moments_; }
  const Vector& variances() const { return variances_; }
  /// Weights rescaled to sum to one.
  Vector normalized_weights() const { return weights_ / weights_.sum(); }
  bool all_weights_positive() const { return (weights_.array() > 0.0).all(); }

  /// Same sources with labels 1 and 2 exchanged (two-source mirror images).
  SystemSpec swapped_pair() const;

  /// Throws Error{InvalidArgument} when 1 <= n <= N does not hold.
  void check_source(int n) const;

 private:
  std::vector<SourceSpec> sources_;
  Vector weights_;
  Vector means_;
  Vector second_moments_;
  Vector variances_;
};

/// Cyclic transmission sequence over source labels.
class Pattern {
 public:
  /// Throws Error{InvalidPattern} for an empty sequence or a label < 1.
  explicit Pattern(std::vector<int> entries);
  Pattern(std::initializer_list<int> entries)
      : Pattern(std::vector<int>(entries)) {}

  std::size_t size() const { return entries_.size(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<int>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// alpha_P(n) for n = 1..num_sources (index n-1).
  std::vector<int> counts(std::size_t num_sources) const;
  int count(int source) const;
  bool is_feasible(std::size_t num_sources) const;
  std::vector<int> missing_sources(std::size_t num_sources) const;
  int max_label() const;

  /// Left rotation: result[i] = entries[(i + k) mod K].
  Pattern rotated(std::size_t k) const;
  Pattern repeated(std::size_t times) const;

  std::string to_string() const;

  bool operator==(const Pattern&) const = default;

 private:
  std::vector<int> entries_;
};

struct MomentPair {
  double mean = 0.0;
  double second_moment = 0.0;

  double variance() const { return second_moment - mean * mean; }
  /// Undefined (NaN) for a zero mean.
  double scv() const { return variance() / (mean * mean); }
};

struct PatternMoments {
  double mean = 0.0;
  double variance = 0.0;
  double second_moment = 0.0;

  MomentPair as_pair() const { return {mean, second_moment}; }
};

/// Moments of the total service time of a sequence of independent
/// transmissions. An empty sequence yields all zeros.
PatternMoments pattern_moments(std::span<const int> entries,
                               const SystemSpec& sys);
/// Throws Error{InvalidPattern} for a label outside 1..N.
PatternMoments pattern_moments(const Pattern& pattern, const SystemSpec& sys);

/// Mean age of a source whose own service has moments `own` and whose
/// inter-service gap has moments `gap`:
///   (2 s^2 + 4 s s~ + q + q~) / (2 (s + s~)).
double mean_aoi_from_moments(const MomentPair& own, const MomentPair& gap);
/// Same quantity through variances.
double mean_aoi_variance_form(const MomentPair& own, const MomentPair& gap);
/// Same quantity through squared coefficients of variation (gap mean > 0).
double mean_aoi_scv_form(const MomentPair& own, const MomentPair& gap);

/// Weighted sum with the stored (raw) weights.
double system_aoi(const Vector& per_source, const SystemSpec& sys);
double system_aoi(std::span<const double> per_source, const SystemSpec& sys);

enum class Method { Analytic, Simulated };

struct SourceAoi {
  int source = 0;
  double mean = 0.0;
  std::optional<double> half_width;  // 95% confidence half-width
  std::optional<double> std_error;
};

struct AoiReport {
  std::vector<SourceAoi> per_source;
  double system_aoi = 0.0;
  std::optional<double> system_half_width;
  std::optional<double> system_std_error;
  Method method = Method::Analytic;

  Vector means() const;
};

/// Builds an analytic report from per-source means.
AoiReport make_analytic_report(const Vector& per_source, const SystemSpec& sys);

const char* to_string(Method method);

}  // namespace aoi
