#pragma once

// Service-time laws matched to a (mean, scv) pair.

#include <cstdint>
#include <random>
#include <string>

namespace aoi {

using Engine = std::mt19937_64;

enum class Family { Deterministic, Exponential, Gamma, HyperExponential2 };

const char* to_string(Family family);
/// Accepts "deterministic", "exponential", "gamma", "hyperexponential2"
/// (also "h2"). Throws Error{Config} otherwise.
Family parse_family(const std::string& name);

struct DistSpec {
  Family family = Family::Exponential;
  double mean = 1.0;
  double scv = 1.0;

  /// Throws Error{InvalidArgument} when the family cannot produce the scv:
  /// deterministic needs 0, exponential 1, gamma > 0, hyperexponential > 1.
  static DistSpec make(Family family, double mean, double scv);
  /// Deterministic for scv 0, exponential for scv 1, gamma otherwise.
  static DistSpec matching(double mean, double scv);

  double second_moment() const { return mean * mean * (1.0 + scv); }
};

/// Draws i.i.d. service times from a DistSpec. The two-phase
/// hyperexponential uses balanced means: phase i is picked with probability
/// p_i and has rate 2 p_i / mean.
class ServiceSampler {
 public:
  explicit ServiceSampler(const DistSpec& spec);

  double operator()(Engine& rng);
  const DistSpec& spec() const { return spec_; }

 private:
  DistSpec spec_;
  std::exponential_distribution<double> exponential_;
  std::gamma_distribution<double> gamma_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  double phase1_probability_ = 1.0;
  std::exponential_distribution<double> phase1_;
  std::exponential_distribution<double> phase2_;
};

/// Sampler bundled with its own engine.
class SampleStream {
 public:
  SampleStream(const DistSpec& spec, std::uint64_t seed)
      : sampler_(spec), rng_(seed) {}
  double next() { return sampler_(rng_); }

 private:
  ServiceSampler sampler_;
  Engine rng_;
};

inline SampleStream make_sampler(const DistSpec& spec, std::uint64_t seed) {
  return SampleStream(spec, seed);
}

}  // namespace aoi
