#pragma once

// Discrete-event simulation of generate-at-will and random-arrival systems.

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "aoi/core_model.hpp"
#include "aoi/distributions.hpp"
#include "aoi/openloop_analytic.hpp"
#include "aoi/two_source.hpp"

namespace aoi {

/// Running age bookkeeping. Age of source n at time t is t minus the
/// generation time of the freshest delivered source-n packet (zero at t = 0).
/// Integrals are exact: the age path is piecewise linear.
class AoiAccumulator {
 public:
  explicit AoiAccumulator(std::size_t n_sources);

  /// Integrals start accumulating from t.
  void start_window(double t);
  /// 1-based source.
  void deliver(int source, double t, double generated);
  /// Accounts the tail [last delivery, t] and ends the window.
  void close(double t);

  bool in_window() const { return in_window_; }
  double age(int source, double t) const { return t - generated_[source - 1]; }
  double window_length() const { return window_end_ - window_start_; }
  const std::vector<double>& integrals() const { return integral_; }
  const std::vector<std::uint64_t>& deliveries() const { return deliveries_; }
  /// Integral / window length, per source.
  Vector mean_age() const;

 private:
  void advance(std::size_t i, double t);

  std::vector<double> generated_;
  std::vector<double> accounted_until_;
  std::vector<double> integral_;
  std::vector<std::uint64_t> deliveries_;
  double window_start_ = 0.0;
  double window_end_ = 0.0;
  bool in_window_ = false;
};

struct GawCyclic {
  Pattern pattern;
};

struct GawProbabilistic {
  ProbVector p;
};

/// replace(n-1, m-1): probability that an arriving source-n packet replaces
/// a waiting source-m packet. Diagonal must be one.
struct RaSingleBuffer {
  Eigen::MatrixXd replace;

  static RaSingleBuffer all_ones(std::size_t n);
  /// Two sources with the given cross probabilities.
  static RaSingleBuffer pair(double p12, double p21);
};

/// Arrivals always replace the waiting packet.
struct LcfsW {};

/// At most one packet per source in server and buffer together. A fresh
/// packet replaces its own source's waiting packet and is discarded while
/// its source is in service. On a completion the server takes the waiting
/// packet that arrived first.
struct Sps {};

/// Counter-guided replacement built from the two-source cyclic optimum.
struct PatternReplacement {
  int n_prime = 1;
  int n_double_prime = 2;
  int k_star = 1;

  static PatternReplacement from_optimum(const TheoremOneResult& optimum);
};

using BufferPolicy = std::variant<RaSingleBuffer, LcfsW, Sps, PatternReplacement>;

struct RandomArrival {
  Vector rates;
  BufferPolicy policy = LcfsW{};
};

using SimMode = std::variant<GawCyclic, GawProbabilistic, RandomArrival>;

struct SimConfig {
  std::vector<DistSpec> services;
  SimMode mode = GawCyclic{Pattern{1}};
  std::uint64_t horizon_events = 1'000'000;  // deliveries per replication
  std::optional<double> horizon_time;         // overrides horizon_events
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
  int replications = 30;
};

/// Moment-matched service laws for every source (see DistSpec::matching).
std::vector<DistSpec> matching_services(const SystemSpec& sys);

/// Per-replication seed: SplitMix64 finalizer applied to
/// master + (r + 1) * 0x9E3779B97F4A7C15. The same rule derives the
/// per-stream seeds inside a replication from the replication seed.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

struct ReplicationRecord {
  int replication = 0;
  std::uint64_t seed = 0;
  Vector per_source;
  double system_aoi = 0.0;
  std::vector<double> integrals;
  double window = 0.0;
  std::uint64_t deliveries = 0;  // in the window, all sources
};

struct DeliveryEvent {
  int source = 0;
  double service_start = 0.0;
  double time = 0.0;
  double generated = 0.0;
  bool in_window = false;
};

using DeliveryObserver = std::function<void(const DeliveryEvent&)>;

/// One replication. Throws Error{InvalidArgument} for horizons too short to
/// leave a measurement window after warmup, or inconsistent configs.
ReplicationRecord simulate_replication(const SimConfig& cfg, const SystemSpec& sys,
                                       int replication,
                                       const DeliveryObserver& observer = {});

std::vector<ReplicationRecord> run_replications(const SimConfig& cfg,
                                                const SystemSpec& sys);

/// Across-replication mean, standard error and 1.96-SE half-width (the last
/// two only with at least two replications).
AoiReport summarize(const std::vector<ReplicationRecord>& records,
                    const SystemSpec& sys);

AoiReport simulate_gaw(const SimConfig& cfg, const SystemSpec& sys);
AoiReport simulate_ra(const SimConfig& cfg, const SystemSpec& sys);
AoiReport simulate(const SimConfig& cfg, const SystemSpec& sys);

struct BufferState {
  std::optional<int> in_service;
  std::optional<int> buffered;
  int counter = 0;
};

enum class BufferAction { StartService, Join, Replace, Discard };
const char* to_string(BufferAction action);

BufferAction pr_policy_step(const PatternReplacement& pr, const BufferState& state,
                            int arriving);
/// Draws from coin only when the replacement probability is strictly
/// between zero and one.
BufferAction ra_sb_step(const RaSingleBuffer& policy, const BufferState& state,
                        int arriving, Engine& coin);
BufferAction lcfs_w_step(const BufferState& state);

struct RaSbSearch {
  double p12 = 1.0;
  double p21 = 1.0;
  double search_aoi = 0.0;  // objective at the chosen point
};

/// Grid search over (p12, p21) for two sources. Every grid point is
/// simulated with the same seeds (common random numbers) using cfg's
/// horizon and replications; cfg.mode must be RandomArrival.
RaSbSearch search_ra_sb(const SimConfig& cfg, const SystemSpec& sys,
                        double step = 0.05);

}  // namespace aoi
