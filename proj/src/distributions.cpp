#include "aoi/distributions.hpp"

#include <cmath>

#include "aoi/error.hpp"

namespace aoi {

const char* to_string(Family family) {
  switch (family) {
    case Family::Deterministic: return "deterministic";
    case Family::Exponential: return "exponential";
    case Family::Gamma: return "gamma";
    case Family::HyperExponential2: return "hyperexponential2";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "deterministic") return Family::Deterministic;
  if (name == "exponential") return Family::Exponential;
  if (name == "gamma") return Family::Gamma;
  if (name == "hyperexponential2" || name == "h2") return Family::HyperExponential2;
  throw Error(ErrorKind::Config, "unknown distribution family '" + name + "'");
}

DistSpec DistSpec::make(Family family, double mean, double scv) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw Error(ErrorKind::InvalidArgument, "distribution mean must be positive");
  }
  if (!(scv >= 0.0) || !std::isfinite(scv)) {
    throw Error(ErrorKind::InvalidArgument, "distribution scv must be nonnegative");
  }
  constexpr double kTol = 1e-12;
  bool ok = true;
  switch (family) {
    case Family::Deterministic: ok = scv <= kTol; break;
    case Family::Exponential: ok = std::abs(scv - 1.0) <= kTol; break;
    case Family::Gamma: ok = scv > 0.0; break;
    case Family::HyperExponential2: ok = scv > 1.0; break;
  }
  if (!ok) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(to_string(family)) + " law cannot have scv " +
                    std::to_string(scv));
  }
  return DistSpec{family, mean, scv};
}

DistSpec DistSpec::matching(double mean, double scv) {
  constexpr double kTol = 1e-12;
  if (scv <= kTol) return make(Family::Deterministic, mean, 0.0);
  if (std::abs(scv - 1.0) <= kTol) return make(Family::Exponential, mean, 1.0);
  return make(Family::Gamma, mean, scv);
}

ServiceSampler::ServiceSampler(const DistSpec& spec) : spec_(spec) {
  switch (spec_.family) {
    case Family::Deterministic:
      break;
    case Family::Exponential:
      exponential_ = std::exponential_distribution<double>(1.0 / spec_.mean);
      break;
    case Family::Gamma:
      gamma_ = std::gamma_distribution<double>(1.0 / spec_.scv, spec_.mean * spec_.scv);
      break;
    case Family::HyperExponential2: {
      const double c = spec_.scv;
      phase1_probability_ = 0.5 * (1.0 + std::sqrt((c - 1.0) / (c + 1.0)));
      const double p2 = 1.0 - phase1_probability_;
      phase1_ = std::exponential_distribution<double>(2.0 * phase1_probability_ / spec_.mean);
      phase2_ = std::exponential_distribution<double>(2.0 * p2 / spec_.mean);
      break;
    }
  }
}

double ServiceSampler::operator()(Engine& rng) {
  switch (spec_.family) {
    case Family::Deterministic: return spec_.mean;
    case Family::Exponential: return exponential_(rng);
    case Family::Gamma: return gamma_(rng);
    case Family::HyperExponential2:
      return uniform_(rng) < phase1_probability_ ? phase1_(rng) : phase2_(rng);
  }
  return spec_.mean;
}

}  // namespace aoi
