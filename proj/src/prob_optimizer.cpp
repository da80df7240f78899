#include "aoi/prob_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace aoi {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

void require_positive_weights(const SystemSpec& sys) {
  if (!sys.all_weights_positive()) {
    throw Error(ErrorKind::DegenerateWeights,
                "probability optimization needs every weight positive");
  }
}

double objective(const Vector& p, const SystemSpec& sys) {
  return pgaw_system_aoi(ProbVector(p), sys);
}

// Minimizes f on [lo, hi] down to a bracket narrower than tol. Returns the
// best abscissa seen.
template <typename F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

Vector two_vector(double p1) {
  Vector p(2);
  p << p1, 1.0 - p1;
  return p;
}

}  // namespace

ProbOptimum optimize_pgaw_two(const SystemSpec& sys, double tol, double grid_step) {
  if (sys.size() != 2) {
    throw Error(ErrorKind::InvalidArgument, "optimize_pgaw_two needs N = 2");
  }
  require_positive_weights(sys);
  if (!(grid_step > 0.0 && grid_step < 0.5) || !(tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid grid step or tolerance");
  }
  const auto f = [&](double p1) { return objective(two_vector(p1), sys); };

  const int cells = static_cast<int>(std::lround(1.0 / grid_step));
  double best_p = 0.5;
  double best_v = f(best_p);
  for (int i = 1; i < cells; ++i) {
    const double p1 = i * grid_step;
    const double v = f(p1);
    if (v < best_v) {
      best_v = v;
      best_p = p1;
    }
  }
  const double lo = std::max(kMinSearchProbability, best_p - grid_step);
  const double hi = std::min(1.0 - kMinSearchProbability, best_p + grid_step);
  const auto [p_ref, v_ref] = golden_section(f, lo, hi, tol);
  if (v_ref <= best_v) {
    best_p = p_ref;
    best_v = v_ref;
  }
  return {ProbVector(two_vector(best_p)), best_v};
}

namespace {

struct LocalResult {
  Vector p;
  double value;
};

LocalResult coordinate_search(Vector p, const SystemSpec& sys,
                              const MultiStartOptions& options) {
  const Eigen::Index n = p.size();
  double value = objective(p, sys);
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double largest_move = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = p[i];
      double min_other = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) min_other = std::min(min_other, p[j]);
      }
      const double lo = kMinSearchProbability;
      const double hi = 1.0 - kMinSearchProbability * (1.0 - pi) / min_other;
      if (!(hi > lo)) continue;

      const auto moved = [&](double t) {
        Vector q = p * ((1.0 - t) / (1.0 - pi));
        q[i] = t;
        return q;
      };
      const auto [t, v] = golden_section(
          [&](double t) { return objective(moved(t), sys); }, lo, hi, 1e-12);
      // Moves that only win by rounding noise are ignored.
      if (v < value - 1e-13 * std::abs(value)) {
        largest_move = std::max(largest_move, std::abs(t - pi) / pi);
        Vector q = moved(t);
        p = q / q.sum();
        value = objective(p, sys);
      }
    }
    if (largest_move <= options.tol) break;
  }
  return {p, value};
}

bool lexicographically_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

}  // namespace

ProbOptimum optimize_pgaw_multi(const SystemSpec& sys,
                                const MultiStartOptions& options) {
  if (sys.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "optimize_pgaw_multi needs N >= 2");
  }
  require_positive_weights(sys);
  if (options.restarts < 1) {
    throw Error(ErrorKind::InvalidArgument, "restarts must be at least 1");
  }
  const auto n = static_cast<Eigen::Index>(sys.size());

  std::optional<LocalResult> best;
  for (int r = 0; r < options.restarts; ++r) {
    Vector start = Vector::Constant(n, 1.0 / static_cast<double>(n));
    if (r > 0) {
      // Uniform point on the simplex, seeded per restart.
      std::seed_seq seq{options.seed, static_cast<std::uint64_t>(r)};
      std::mt19937_64 rng(seq);
      std::exponential_distribution<double> expo(1.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        start[i] = std::max(expo(rng), 1e-3);
      }
      start /= start.sum();
    }
    LocalResult local = coordinate_search(start, sys, options);
    if (!best || local.value < best->value ||
        (local.value == best->value && lexicographically_less(local.p, best->p))) {
      best = std::move(local);
    }
  }
  return {ProbVector(best->p), best->value};
}

}  // namespace aoi
