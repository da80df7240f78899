#include "aoi/pattern_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aoi/openloop_analytic.hpp"

namespace aoi {

namespace {

constexpr double kImprovementTolerance = 1e-12;

bool improves(double candidate, double incumbent) {
  return candidate < incumbent - kImprovementTolerance * std::abs(incumbent);
}

void require_searchable(const SystemSpec& sys) {
  if (sys.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "pattern search needs N >= 2");
  }
  if (!sys.all_weights_positive()) {
    throw Error(ErrorKind::DegenerateWeights,
                "pattern search needs every weight positive; a zero-weight "
                "source would be starved");
  }
}

}  // namespace

Pattern insert(const Pattern& pattern, int n, std::size_t k) {
  if (k >= pattern.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "insertion position " + std::to_string(k) +
                    " outside 0.." + std::to_string(pattern.size() - 1));
  }
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "source label must be >= 1");
  std::vector<int> out;
  out.reserve(pattern.size() + 1);
  out.insert(out.end(), pattern.begin(), pattern.begin() + static_cast<std::ptrdiff_t>(k));
  out.push_back(n);
  out.insert(out.end(), pattern.begin() + static_cast<std::ptrdiff_t>(k), pattern.end());
  return Pattern(std::move(out));
}

const char* to_string(SearchStop stop) {
  return stop == SearchStop::Converged ? "converged" : "hit-kmax";
}

std::size_t default_kmax(const SystemSpec& sys) { return 100 * sys.size(); }

SearchResult insertion_search(const SystemSpec& sys,
                              std::optional<std::size_t> kmax_opt) {
  require_searchable(sys);
  const std::size_t n_sources = sys.size();
  const std::size_t kmax = kmax_opt.value_or(default_kmax(sys));
  if (kmax < n_sources) {
    throw Error(ErrorKind::InvalidArgument, "kmax must be at least N");
  }

  std::vector<int> rr(n_sources);
  for (std::size_t i = 0; i < n_sources; ++i) rr[i] = static_cast<int>(i + 1);
  Pattern current(rr);
  double current_aoi = cgaw_system_aoi(current, sys);

  SearchTrace trace;
  trace.steps.push_back({current.size(), current, current_aoi, 1});
  trace.stop = SearchStop::Converged;

  std::vector<double> scores;
  std::vector<Pattern> candidates;
  while (true) {
    if (current.size() >= kmax) {
      trace.stop = SearchStop::HitKmax;
      break;
    }
    // Score every non-equivalent insertion first, then pick the winner, so
    // the result does not depend on evaluation order.
    candidates.clear();
    scores.clear();
    for (int n = 1; n <= static_cast<int>(n_sources); ++n) {
      for (std::size_t k = 0; k < current.size(); ++k) {
        if (current[k] == n) continue;
        candidates.push_back(insert(current, n, k));
        scores.push_back(cgaw_system_aoi(candidates.back(), sys));
      }
    }
    const double lowest = *std::min_element(scores.begin(), scores.end());
    std::size_t winner = 0;
    while (improves(lowest, scores[winner])) ++winner;

    if (!improves(scores[winner], current_aoi)) break;
    current = candidates[winner];
    current_aoi = scores[winner];
    trace.steps.push_back({current.size(), current, current_aoi, scores.size()});
  }
  return {current, current_aoi, std::move(trace)};
}

namespace {

long double exhaustive_cost(std::size_t n_sources, std::size_t k_cap) {
  long double total = 0.0L;
  for (std::size_t k = n_sources; k <= k_cap; ++k) {
    total += static_cast<long double>(k) *
             std::pow(static_cast<long double>(n_sources), static_cast<long double>(k));
  }
  return total;
}

// Calls visit(a) for each necklace of length len over {0..alphabet-1}, in
// lexicographic order (Fredricksen-Kessler-Maiorana).
template <typename Visit>
void for_each_necklace(std::size_t len, int alphabet, Visit&& visit) {
  std::vector<int> a(len + 1, 0);
  visit(a);
  while (true) {
    std::size_t i = len;
    while (i > 0 && a[i] == alphabet - 1) --i;
    if (i == 0) return;
    ++a[i];
    for (std::size_t j = i + 1; j <= len; ++j) a[j] = a[j - i];
    if (len % i == 0) visit(a);
  }
}

}  // namespace

ExhaustiveResult exhaustive_search(const SystemSpec& sys, std::size_t k_cap,
                                   std::uint64_t budget) {
  require_searchable(sys);
  const std::size_t n_sources = sys.size();
  if (k_cap < n_sources) {
    throw Error(ErrorKind::InvalidArgument, "k_cap must be at least N");
  }
  const long double cost = exhaustive_cost(n_sources, k_cap);
  if (cost > static_cast<long double>(budget)) {
    throw Error(ErrorKind::BudgetExceeded,
                "exhaustive search over N = " + std::to_string(n_sources) +
                    ", K <= " + std::to_string(k_cap) + " needs about " +
                    std::to_string(static_cast<double>(cost)) +
                    " entry evaluations, over the budget of " +
                    std::to_string(budget));
  }

  std::optional<Pattern> best;
  double best_aoi = std::numeric_limits<double>::infinity();
  std::uint64_t evaluated = 0;
  std::vector<int> seen(n_sources);
  std::vector<int> entries;
  for (std::size_t len = n_sources; len <= k_cap; ++len) {
    for_each_necklace(len, static_cast<int>(n_sources), [&](const std::vector<int>& a) {
      std::fill(seen.begin(), seen.end(), 0);
      for (std::size_t j = 1; j <= len; ++j) seen[static_cast<std::size_t>(a[j])] = 1;
      if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return;
      entries.assign(a.begin() + 1, a.end());
      for (int& e : entries) ++e;
      Pattern p(entries);
      const double v = cgaw_system_aoi(p, sys);
      ++evaluated;
      if (!best || improves(v, best_aoi)) {
        best = std::move(p);
        best_aoi = v;
      }
    });
  }
  return {*best, best_aoi, evaluated};
}

}  // namespace aoi
