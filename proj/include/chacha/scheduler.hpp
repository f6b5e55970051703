#pragma once

// Live-challenger scheduling under a fixed number of model slots: doubling
// resource leases, eviction of lease-expiring challengers that rank in the
// worse half, and admission of pending or least-leased candidates.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chacha/bounds.hpp"
#include "chacha/learner.hpp"
#include "chacha/random.hpp"

namespace chacha {

class EmptyCandidateSet : public std::logic_error {
 public:
  EmptyCandidateSet() : std::logic_error("choose() called with no candidates") {}
};

class EmptySet : public std::logic_error {
 public:
  EmptySet() : std::logic_error("median of an empty set") {}
};

/// Anything the scheduler can lease slots to.
template <class R>
concept SchedulableRecord = requires(R& r, const R& cr) {
  { cr.id() } -> std::convertible_to<const std::string&>;
  { cr.consumed() } -> std::convertible_to<std::uint64_t>;
  { r.lease } -> std::convertible_to<std::optional<std::uint64_t>>;
};

/// Per-configuration runtime state. The model exists only while live; once it
/// is released the learned weights are gone for good.
struct ChallengerRecord {
  Config config;
  std::optional<LinearModel> model;
  LossAccumulator loss;           // clipped absolute error, drives the bounds
  LossAccumulator squared_error;  // raw squared error, for reporting
  std::optional<std::uint64_t> lease;
  bool eliminated = false;

  // cached dimension, valid while dim_version matches the tracker
  mutable std::uint64_t dim = 1;
  mutable std::uint64_t dim_version = ~std::uint64_t{0};

  explicit ChallengerRecord(Config c) : config(std::move(c)) {}

  const std::string& id() const { return config.id(); }
  bool live() const { return model.has_value(); }
  std::uint64_t consumed() const { return loss.count; }

  /// Fresh model and empty statistics.
  void go_live(const LearnerOptions& opts) {
    model.emplace(config, opts);
    loss.reset();
    squared_error.reset();
  }
  void release() { model.reset(); }
};

enum class EvictionRule {
  Median,      // evict an expiring challenger only if it ranks in the worse half
  Aggressive,  // evict every expiring challenger
};

struct ScheduleOptions {
  std::size_t budget = 5;  // b; eviction only happens when the pool exceeds it
  std::size_t slots = 4;   // live capacity handed to challengers (b - 1 normally)
  std::uint64_t n_min = 1;
  EvictionRule rule = EvictionRule::Median;
};

struct ScheduleReport {
  std::vector<std::string> dropped;   // left the pool
  std::vector<std::string> evicted;   // lease expired and ranked poorly
  std::vector<std::string> admitted;
  std::vector<std::string> expiring;  // reached their lease this call
};

/// Median with the lower middle value for even sizes.
inline double median_upper(std::vector<double> values) {
  if (values.empty()) throw EmptySet();
  const std::size_t k = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

/// Picks a pending record at random (granting it lease n_min); otherwise the
/// smallest lease, ties to the smaller id.
template <SchedulableRecord R>
R& choose(std::span<R* const> candidates, std::uint64_t n_min, Rng& rng) {
  if (candidates.empty()) throw EmptyCandidateSet();
  std::vector<R*> pending;
  for (R* r : candidates)
    if (!r->lease) pending.push_back(r);
  if (!pending.empty()) {
    R* pick = pending[uniform_index(rng, pending.size())];
    pick->lease = n_min;
    return *pick;
  }
  R* best = candidates.front();
  for (R* r : candidates)
    if (*r->lease < *best->lease || (*r->lease == *best->lease && r->id() < best->id())) best = r;
  return *best;
}

/// One scheduling pass over the live set.
///
/// `pool` is the candidate pool S (live or not, never eliminated); `live` is
/// updated in place. `upper(r)` returns the loss upper bound of r,
/// `admit(r)` makes r live with fresh state, `release(r)` drops its model.
template <SchedulableRecord R, class UpperFn, class AdmitFn, class ReleaseFn>
ScheduleReport schedule(const ScheduleOptions& opts, std::vector<R*>& live, std::span<R* const> pool, Rng& rng,
                        UpperFn&& upper, AdmitFn&& admit, ReleaseFn&& release) {
  ScheduleReport report;
  auto in_pool = [&](const R* r) { return std::find(pool.begin(), pool.end(), r) != pool.end(); };
  auto take_out = [&](R* r) {
    release(*r);
    live.erase(std::find(live.begin(), live.end(), r));
  };

  // 1. records that left the pool
  for (R* r : std::vector<R*>(live))
    if (!in_pool(r)) {
      report.dropped.push_back(r->id());
      take_out(r);
    }

  // 2. lease expiry: double, then maybe evict
  std::vector<R*> expiring;
  for (R* r : live) {
    if (!r->lease) r->lease = opts.n_min;
    if (r->consumed() >= *r->lease) {
      *r->lease *= 2;
      expiring.push_back(r);
      report.expiring.push_back(r->id());
    }
  }
  if (!expiring.empty() && pool.size() > opts.budget) {
    std::vector<R*> victims;
    if (opts.rule == EvictionRule::Aggressive) {
      victims = expiring;
    } else {
      std::vector<double> uppers;
      uppers.reserve(live.size());
      for (R* r : live) uppers.push_back(upper(*r));
      const double med = median_upper(uppers);
      std::vector<std::pair<double, R*>> ranked;
      for (R* r : expiring)
        if (const double u = upper(*r); u > med) ranked.emplace_back(u, r);
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second->id() < b.second->id();
      });
      const std::size_t cap = (expiring.size() + 1) / 2;
      for (std::size_t i = 0; i < ranked.size() && i < cap; ++i) victims.push_back(ranked[i].second);
    }
    for (R* r : victims) {
      report.evicted.push_back(r->id());
      take_out(r);
    }
  }

  // 3. fill free slots
  while (live.size() < opts.slots) {
    std::vector<R*> waiting;
    for (R* r : pool)
      if (std::find(live.begin(), live.end(), r) == live.end()) waiting.push_back(r);
    if (waiting.empty()) break;
    R& r = choose<R>(waiting, opts.n_min, rng);
    admit(r);
    live.push_back(&r);
    report.admitted.push_back(r.id());
  }
  return report;
}

}  // namespace chacha
