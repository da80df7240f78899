#include "aoi/des.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aoi/error.hpp"
#include "aoi/parallel.hpp"

namespace aoi {

namespace {

constexpr std::uint64_t kScheduleStream = 1000;
constexpr std::uint64_t kArrivalStream = 100;
constexpr std::uint64_t kCoinStream = 2000;

std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool moments_match(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

void validate(const SimConfig& cfg, const SystemSpec& sys) {
  const std::size_t n = sys.size();
  if (cfg.services.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "need one service law per source");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = sys.sources()[i];
    if (!moments_match(cfg.services[i].mean, src.mean()) ||
        !moments_match(cfg.services[i].second_moment(), src.second_moment())) {
      throw Error(ErrorKind::InvalidArgument,
                  "service law of source " + std::to_string(i + 1) +
                      " does not match its moments");
    }
  }
  if (cfg.replications < 1) {
    throw Error(ErrorKind::InvalidArgument, "replications must be at least 1");
  }
  if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "warmup fraction must be in [0, 1)");
  }
  if (cfg.horizon_time && !(*cfg.horizon_time > 0.0 && std::isfinite(*cfg.horizon_time))) {
    throw Error(ErrorKind::InvalidArgument, "time horizon must be positive");
  }
  if (const auto* cyc = std::get_if<GawCyclic>(&cfg.mode)) {
    require_feasible(cyc->pattern, sys);
  } else if (const auto* prob = std::get_if<GawProbabilistic>(&cfg.mode)) {
    if (prob->p.size() != n) {
      throw Error(ErrorKind::InvalidArgument, "probability vector size differs from N");
    }
  } else {
    const auto& ra = std::get<RandomArrival>(cfg.mode);
    if (static_cast<std::size_t>(ra.rates.size()) != n) {
      throw Error(ErrorKind::InvalidArgument, "need one arrival rate per source");
    }
    for (double rate : ra.rates) {
      if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw Error(ErrorKind::InvalidArgument, "arrival rates must be positive");
      }
    }
    if (const auto* sb = std::get_if<RaSingleBuffer>(&ra.policy)) {
      if (static_cast<std::size_t>(sb->replace.rows()) != n ||
          static_cast<std::size_t>(sb->replace.cols()) != n) {
        throw Error(ErrorKind::InvalidArgument, "replacement matrix must be N x N");
      }
      for (Eigen::Index i = 0; i < sb->replace.rows(); ++i) {
        for (Eigen::Index j = 0; j < sb->replace.cols(); ++j) {
          const double p = sb->replace(i, j);
          if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorKind::InvalidArgument,
                        "replacement probabilities must lie in [0, 1]");
          }
        }
        if (sb->replace(i, i) != 1.0) {
          throw Error(ErrorKind::InvalidArgument,
                      "a packet must always replace its own source's packet");
        }
      }
    } else if (const auto* pr = std::get_if<PatternReplacement>(&ra.policy)) {
      if (n != 2) {
        throw Error(ErrorKind::InvalidArgument,
                    "pattern-based replacement is defined for two sources only");
      }
      const bool labels_ok = (pr->n_prime == 1 && pr->n_double_prime == 2) ||
                             (pr->n_prime == 2 && pr->n_double_prime == 1);
      if (!labels_ok || pr->k_star < 1) {
        throw Error(ErrorKind::InvalidArgument,
                    "pattern-based replacement needs distinct sources and K* >= 1");
      }
    }
  }
}

// Decides when the measurement window opens and closes.
class Horizon {
 public:
  Horizon(const SimConfig& cfg, std::size_t align) {
    if (cfg.horizon_time) {
      by_time_ = true;
      end_time_ = *cfg.horizon_time;
      warm_time_ = cfg.warmup_fraction * end_time_;
      return;
    }
    const std::uint64_t total = cfg.horizon_events;
    auto warm = static_cast<std::uint64_t>(
        std::floor(cfg.warmup_fraction * static_cast<double>(total)));
    std::uint64_t last = total;
    if (align > 1) {
      // Whole pattern cycles only, so periodic paths average exactly.
      warm = (warm + align - 1) / align * align;
      last = total / align * align;
    }
    if (last <= warm || last - warm < align) {
      throw Error(ErrorKind::InvalidArgument,
                  "horizon of " + std::to_string(total) +
                      " deliveries leaves no measurement window after warmup");
    }
    warm_count_ = warm;
    end_count_ = last;
  }

  bool by_time() const { return by_time_; }

  // Time mode: called before handling an event at time t. Returns false when
  // the run is over.
  bool before_event(AoiAccumulator& acc, double t) const {
    if (!acc.in_window() && t >= warm_time_) acc.start_window(warm_time_);
    if (t > end_time_) {
      acc.close(end_time_);
      return false;
    }
    return true;
  }

  // Count mode: called after a delivery. Returns false when the run is over.
  bool after_delivery(AoiAccumulator& acc, std::uint64_t delivered, double t) const {
    if (delivered == warm_count_) acc.start_window(t);
    if (delivered == end_count_) {
      acc.close(t);
      return false;
    }
    return true;
  }

  void open_at_zero(AoiAccumulator& acc) const {
    if (by_time() ? warm_time_ <= 0.0 : warm_count_ == 0) acc.start_window(0.0);
  }

 private:
  bool by_time_ = false;
  double end_time_ = 0.0;
  double warm_time_ = 0.0;
  std::uint64_t warm_count_ = 0;
  std::uint64_t end_count_ = 0;
};

std::vector<ServiceSampler> make_samplers(const SimConfig& cfg) {
  return {cfg.services.begin(), cfg.services.end()};
}

std::vector<Engine> make_engines(std::uint64_t seed, std::size_t n, std::uint64_t stream) {
  std::vector<Engine> engines;
  engines.reserve(n);
  for (std::size_t i = 0; i < n; ++i) engines.emplace_back(split_seed(seed, stream + i));
  return engines;
}

template <class NextSource>
void run_gaw(const SimConfig& cfg, std::uint64_t seed, std::size_t align,
             AoiAccumulator& acc, const DeliveryObserver& observer,
             NextSource&& next_source) {
  const std::size_t n = cfg.services.size();
  auto samplers = make_samplers(cfg);
  auto engines = make_engines(seed, n, 0);
  Engine schedule(split_seed(seed, kScheduleStream));
  const Horizon horizon(cfg, align);
  horizon.open_at_zero(acc);

  double t = 0.0;
  std::uint64_t delivered = 0;
  for (;;) {
    const int src = next_source(schedule);
    const auto i = static_cast<std::size_t>(src - 1);
    const double start = t;
    const double end = t + samplers[i](engines[i]);
    if (horizon.by_time() && !horizon.before_event(acc, end)) return;
    acc.deliver(src, end, start);
    t = end;
    ++delivered;
    if (observer) observer({src, start, end, start, acc.in_window()});
    if (!horizon.by_time() && !horizon.after_delivery(acc, delivered, t)) return;
  }
}

struct Packet {
  int source = 0;
  double arrival = 0.0;
  double start = 0.0;
};

class SingleRoom {
 public:
  template <class Decide>
  void offer(const Packet& packet, BufferState state, Decide&& decide) {
    state.buffered = buffer_ ? std::optional<int>(buffer_->source) : std::nullopt;
    switch (decide(state, packet.source)) {
      case BufferAction::Join:
      case BufferAction::Replace: buffer_ = packet; break;
      case BufferAction::Discard:
      case BufferAction::StartService: break;
    }
  }

  std::optional<Packet> pop() {
    auto out = buffer_;
    buffer_.reset();
    return out;
  }

 private:
  std::optional<Packet> buffer_;
};

class PerSourceRoom {
 public:
  explicit PerSourceRoom(std::size_t n) : slots_(n) {}

  void offer(const Packet& packet) {
    slots_[static_cast<std::size_t>(packet.source - 1)] = packet;
  }

  std::optional<Packet> pop() {
    std::optional<Packet>* earliest = nullptr;
    for (auto& slot : slots_) {
      if (slot && (!earliest || slot->arrival < (*earliest)->arrival)) earliest = &slot;
    }
    if (!earliest) return std::nullopt;
    auto out = *earliest;
    earliest->reset();
    return out;
  }

 private:
  std::vector<std::optional<Packet>> slots_;
};

// Offer(packet, state) places an arrival that found the server busy; it
// returns true when the arrival preempts the packet in service.
template <class Room, class Offer>
void run_ra(const SimConfig& cfg, const RandomArrival& ra, std::uint64_t seed,
            AoiAccumulator& acc, const DeliveryObserver& observer,
            const PatternReplacement& counter_roles, Room& room, Offer&& offer) {
  const std::size_t n = cfg.services.size();
  auto samplers = make_samplers(cfg);
  auto service_engines = make_engines(seed, n, 0);
  auto arrival_engines = make_engines(seed, n, kArrivalStream);
  std::vector<std::exponential_distribution<double>> interarrival;
  for (double rate : ra.rates) interarrival.emplace_back(rate);
  std::vector<double> next_arrival(n);
  for (std::size_t i = 0; i < n; ++i) next_arrival[i] = interarrival[i](arrival_engines[i]);

  const Horizon horizon(cfg, 1);
  horizon.open_at_zero(acc);

  std::optional<Packet> serving;
  double done_at = std::numeric_limits<double>::infinity();
  int counter = 0;
  const auto start_service = [&](Packet packet, double t) {
    packet.start = t;
    const auto i = static_cast<std::size_t>(packet.source - 1);
    done_at = t + samplers[i](service_engines[i]);
    serving = packet;
    if (packet.source == counter_roles.n_prime) {
      ++counter;
    } else if (packet.source == counter_roles.n_double_prime) {
      counter = 0;
    }
  };

  std::uint64_t delivered = 0;
  for (;;) {
    const auto a = static_cast<std::size_t>(
        std::min_element(next_arrival.begin(), next_arrival.end()) - next_arrival.begin());
    if (serving && done_at <= next_arrival[a]) {
      const double t = done_at;
      if (horizon.by_time() && !horizon.before_event(acc, t)) return;
      const Packet done = *serving;
      acc.deliver(done.source, t, done.arrival);
      ++delivered;
      if (observer) observer({done.source, done.start, t, done.arrival, acc.in_window()});
      serving.reset();
      done_at = std::numeric_limits<double>::infinity();
      if (auto next = room.pop()) start_service(*next, t);
      if (!horizon.by_time() && !horizon.after_delivery(acc, delivered, t)) return;
    } else {
      const double t = next_arrival[a];
      if (horizon.by_time() && !horizon.before_event(acc, t)) return;
      next_arrival[a] = t + interarrival[a](arrival_engines[a]);
      const Packet packet{static_cast<int>(a + 1), t, t};
      if (!serving) {
        start_service(packet, t);
      } else {
        if (offer(packet, BufferState{serving->source, std::nullopt, counter})) {
          start_service(packet, t);
        }
      }
    }
  }
}

void run_ra_mode(const SimConfig& cfg, const RandomArrival& ra, std::uint64_t seed,
                 AoiAccumulator& acc, const DeliveryObserver& observer) {
  const std::size_t n = cfg.services.size();
  std::visit(
      [&](const auto& policy) {
        using P = std::decay_t<decltype(policy)>;
        if constexpr (std::is_same_v<P, Sps>) {
          PerSourceRoom room(n);
          run_ra(cfg, ra, seed, acc, observer, PatternReplacement{}, room,
                 [&](const Packet& p, const BufferState& s) {
                   // At most one packet per source in server and buffer
                   // together; service is never interrupted.
                   if (s.in_service != p.source) room.offer(p);
                   return false;
                 });
        } else {
          SingleRoom room;
          Engine coin(split_seed(seed, kCoinStream));
          const auto decide = [&](const BufferState& s, int arriving) {
            if constexpr (std::is_same_v<P, LcfsW>) {
              return lcfs_w_step(s);
            } else if constexpr (std::is_same_v<P, RaSingleBuffer>) {
              return ra_sb_step(policy, s, arriving, coin);
            } else {
              return pr_policy_step(policy, s, arriving);
            }
          };
          PatternReplacement roles;
          if constexpr (std::is_same_v<P, PatternReplacement>) roles = policy;
          run_ra(cfg, ra, seed, acc, observer, roles, room,
                 [&](const Packet& p, const BufferState& s) {
                   room.offer(p, s, decide);
                   return false;
                 });
        }
      },
      ra.policy);
}

}  // namespace

AoiAccumulator::AoiAccumulator(std::size_t n_sources)
    : generated_(n_sources, 0.0),
      accounted_until_(n_sources, 0.0),
      integral_(n_sources, 0.0),
      deliveries_(n_sources, 0) {}

void AoiAccumulator::start_window(double t) {
  std::fill(accounted_until_.begin(), accounted_until_.end(), t);
  std::fill(integral_.begin(), integral_.end(), 0.0);
  std::fill(deliveries_.begin(), deliveries_.end(), 0);
  window_start_ = t;
  window_end_ = t;
  in_window_ = true;
}

void AoiAccumulator::advance(std::size_t i, double t) {
  // Area of the trapezoid under age between accounted_until_ and t.
  const double from = accounted_until_[i];
  integral_[i] += 0.5 * (t - from) * ((t - generated_[i]) + (from - generated_[i]));
  accounted_until_[i] = t;
}

void AoiAccumulator::deliver(int source, double t, double generated) {
  const auto i = static_cast<std::size_t>(source - 1);
  if (in_window_) {
    advance(i, t);
    ++deliveries_[i];
  }
  generated_[i] = std::max(generated_[i], generated);
}

void AoiAccumulator::close(double t) {
  if (!in_window_) return;
  for (std::size_t i = 0; i < integral_.size(); ++i) advance(i, t);
  window_end_ = t;
  in_window_ = false;
}

Vector AoiAccumulator::mean_age() const {
  Vector out(static_cast<Eigen::Index>(integral_.size()));
  for (std::size_t i = 0; i < integral_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = integral_[i] / window_length();
  }
  return out;
}

RaSingleBuffer RaSingleBuffer::all_ones(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  return {Eigen::MatrixXd::Ones(size, size)};
}

RaSingleBuffer RaSingleBuffer::pair(double p12, double p21) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, p12, p21, 1.0;
  return {m};
}

PatternReplacement PatternReplacement::from_optimum(const TheoremOneResult& optimum) {
  const int n_prime = optimum.n_prime();
  return {n_prime, 3 - n_prime, optimum.k_n_prime()};
}

std::vector<DistSpec> matching_services(const SystemSpec& sys) {
  std::vector<DistSpec> out;
  for (const auto& src : sys.sources()) out.push_back(DistSpec::matching(src.mean(), src.scv()));
  return out;
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

ReplicationRecord simulate_replication(const SimConfig& cfg, const SystemSpec& sys,
                                       int replication,
                                       const DeliveryObserver& observer) {
  validate(cfg, sys);
  const std::uint64_t seed = split_seed(cfg.seed, static_cast<std::uint64_t>(replication));
  AoiAccumulator acc(sys.size());

  if (const auto* cyc = std::get_if<GawCyclic>(&cfg.mode)) {
    const auto& entries = cyc->pattern.entries();
    std::size_t pos = 0;
    run_gaw(cfg, seed, entries.size(), acc, observer, [&](Engine&) {
      const int src = entries[pos];
      pos = pos + 1 == entries.size() ? 0 : pos + 1;
      return src;
    });
  } else if (const auto* prob = std::get_if<GawProbabilistic>(&cfg.mode)) {
    const Vector& p = prob->p.values();
    std::discrete_distribution<int> pick(p.begin(), p.end());
    run_gaw(cfg, seed, 1, acc, observer, [&](Engine& rng) { return pick(rng) + 1; });
  } else {
    run_ra_mode(cfg, std::get<RandomArrival>(cfg.mode), seed, acc, observer);
  }

  if (!(acc.window_length() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "measurement window is empty");
  }
  ReplicationRecord rec;
  rec.replication = replication;
  rec.seed = seed;
  rec.per_source = acc.mean_age();
  rec.system_aoi = system_aoi(rec.per_source, sys);
  rec.integrals = acc.integrals();
  rec.window = acc.window_length();
  for (auto d : acc.deliveries()) rec.deliveries += d;
  return rec;
}

std::vector<ReplicationRecord> run_replications(const SimConfig& cfg,
                                                const SystemSpec& sys) {
  validate(cfg, sys);
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(cfg.replications));
  parallel_for(records.size(), [&](std::size_t r) {
    records[r] = simulate_replication(cfg, sys, static_cast<int>(r));
  });
  return records;
}

AoiReport summarize(const std::vector<ReplicationRecord>& records,
                    const SystemSpec& sys) {
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "no replications");
  const std::size_t n = sys.size();
  const double r = static_cast<double>(records.size());
  const auto stats = [&](auto value) {
    double mean = 0.0;
    for (const auto& rec : records) mean += value(rec);
    mean /= r;
    std::optional<double> se;
    if (records.size() > 1) {
      double ss = 0.0;
      for (const auto& rec : records) ss += (value(rec) - mean) * (value(rec) - mean);
      se = std::sqrt(ss / (r - 1.0) / r);
    }
    return std::pair{mean, se};
  };

  AoiReport report;
  report.method = Method::Simulated;
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const auto [mean, se] = stats([&](const ReplicationRecord& rec) { return rec.per_source[idx]; });
    SourceAoi s{static_cast<int>(i + 1), mean, std::nullopt, se};
    if (se) s.half_width = 1.96 * *se;
    report.per_source.push_back(s);
  }
  const auto [sys_mean, sys_se] =
      stats([](const ReplicationRecord& rec) { return rec.system_aoi; });
  report.system_aoi = sys_mean;
  report.system_std_error = sys_se;
  if (sys_se) report.system_half_width = 1.96 * *sys_se;
  return report;
}

AoiReport simulate_gaw(const SimConfig& cfg, const SystemSpec& sys) {
  if (std::holds_alternative<RandomArrival>(cfg.mode)) {
    throw Error(ErrorKind::InvalidArgument, "simulate_gaw needs a generate-at-will mode");
  }
  return summarize(run_replications(cfg, sys), sys);
}

AoiReport simulate_ra(const SimConfig& cfg, const SystemSpec& sys) {
  if (!std::holds_alternative<RandomArrival>(cfg.mode)) {
    throw Error(ErrorKind::InvalidArgument, "simulate_ra needs random-arrival mode");
  }
  return summarize(run_replications(cfg, sys), sys);
}

AoiReport simulate(const SimConfig& cfg, const SystemSpec& sys) {
  return summarize(run_replications(cfg, sys), sys);
}

const char* to_string(BufferAction action) {
  switch (action) {
    case BufferAction::StartService: return "start-service";
    case BufferAction::Join: return "join";
    case BufferAction::Replace: return "replace";
    case BufferAction::Discard: return "discard";
  }
  return "?";
}

BufferAction lcfs_w_step(const BufferState& state) {
  if (!state.in_service) return BufferAction::StartService;
  if (!state.buffered) return BufferAction::Join;
  return BufferAction::Replace;
}

BufferAction ra_sb_step(const RaSingleBuffer& policy, const BufferState& state,
                        int arriving, Engine& coin) {
  if (!state.in_service) return BufferAction::StartService;
  if (!state.buffered) return BufferAction::Join;
  const double p = policy.replace(arriving - 1, *state.buffered - 1);
  if (p >= 1.0) return BufferAction::Replace;
  if (p <= 0.0) return BufferAction::Discard;
  return std::uniform_real_distribution<double>(0.0, 1.0)(coin) < p
             ? BufferAction::Replace
             : BufferAction::Discard;
}

BufferAction pr_policy_step(const PatternReplacement& pr, const BufferState& state,
                            int arriving) {
  if (!state.in_service) return BufferAction::StartService;
  if (!state.buffered) return BufferAction::Join;
  if (*state.buffered == arriving) return BufferAction::Replace;
  // Buffer holds the other source from here on.
  if (*state.in_service == pr.n_prime && state.counter >= pr.k_star) {
    // Enough n' services in a row: favor an n'' packet.
    return arriving == pr.n_double_prime ? BufferAction::Replace : BufferAction::Discard;
  }
  return arriving == pr.n_prime ? BufferAction::Replace : BufferAction::Discard;
}

RaSbSearch search_ra_sb(const SimConfig& cfg, const SystemSpec& sys, double step) {
  if (sys.size() != 2) {
    throw Error(ErrorKind::InvalidArgument, "replacement search is for two sources");
  }
  if (!std::holds_alternative<RandomArrival>(cfg.mode)) {
    throw Error(ErrorKind::InvalidArgument, "replacement search needs random-arrival mode");
  }
  if (!(step > 0.0 && step <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid step must be in (0, 1]");
  }
  const int cells = static_cast<int>(std::lround(1.0 / step));
  const auto grid_value = [&](int i) { return std::min(1.0, i * step); };
  const std::size_t points = static_cast<std::size_t>((cells + 1) * (cells + 1));
  std::vector<double> objective(points);
  parallel_for(points, [&](std::size_t k) {
    SimConfig point = cfg;
    auto& ra = std::get<RandomArrival>(point.mode);
    ra.policy = RaSingleBuffer::pair(grid_value(static_cast<int>(k) / (cells + 1)),
                                     grid_value(static_cast<int>(k) % (cells + 1)));
    double total = 0.0;
    for (int r = 0; r < point.replications; ++r) {
      total += simulate_replication(point, sys, r).system_aoi;
    }
    objective[k] = total / point.replications;
  });
  const auto best = static_cast<std::size_t>(
      std::min_element(objective.begin(), objective.end()) - objective.begin());
  return {grid_value(static_cast<int>(best) / (cells + 1)),
          grid_value(static_cast<int>(best) % (cells + 1)), objective[best]};
}

}  // namespace aoi
