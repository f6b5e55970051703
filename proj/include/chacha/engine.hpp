#pragma once

// The online AutoML loop: schedule live challengers, predict with the
// incumbent, learn from the label, then run elimination and promotion tests
// against the champion and grow the pool when a new champion appears.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chacha/bounds.hpp"
#include "chacha/config_oracle.hpp"
#include "chacha/ingest.hpp"
#include "chacha/learner.hpp"
#include "chacha/random.hpp"
#include "chacha/scheduler.hpp"

namespace chacha {

class InvalidBudget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class EngineVariant {
  Standard,
  AggressiveScheduling,  // every lease-expiring challenger is evicted
  NoChampion,            // aggressive, and the champion competes for slots too
};

struct EngineOptions {
  std::size_t budget = 5;
  TuningTask task = TuningTask::NI;
  BoundParams bounds{};
  OracleParams oracle{};
  LearnerOptions learner{};
  std::uint64_t n_min = 1;
  std::uint64_t seed = 0;
  EngineVariant variant = EngineVariant::Standard;
  // When false the pool is frozen: no promotion, elimination or expansion.
  bool run_tests = true;
  // Replaces oracle(c_init) as the starting pool.
  std::optional<std::vector<Config>> initial_pool;
  // Keep every per-step test input (large; for offline replay).
  bool log_tests = false;
};

struct StepRecord {
  std::uint64_t t = 0;
  std::string incumbent;
  double prediction = 0.0;
  double label = 0.0;
  double squared_error = 0.0;
  double clipped_abs_error = 0.0;
  std::string champion;
  std::size_t pool_size = 0;  // |S|, challengers only
  std::size_t live_size = 0;  // live models, champion included
};

struct PromotionEvent {
  std::uint64_t t = 0;
  std::string old_champion;
  std::string new_champion;
};

struct EliminationEvent {
  std::uint64_t t = 0;
  std::string id;
};

/// Inputs of one challenger-vs-champion test.
struct TestLogEntry {
  std::uint64_t t = 0;
  std::string challenger;
  std::string champion;
  Bounds challenger_bounds;
  Bounds champion_bounds;
  bool challenger_live = false;
};

struct IncumbentCandidate {
  std::string_view id;
  double upper = kInf;
  bool is_champion = false;
};

/// Index of the candidate with the smallest upper bound; ties go to the
/// champion, then to the smaller id. When nobody is trained all bounds are
/// +inf and the champion wins the tie.
inline std::size_t select_incumbent(std::span<const IncumbentCandidate> candidates) {
  if (candidates.empty()) throw std::logic_error("no live model to predict with");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& b = candidates[best];
    if (c.upper < b.upper) {
      best = i;
    } else if (c.upper == b.upper) {
      if (c.is_champion != b.is_champion) {
        if (c.is_champion) best = i;
      } else if (c.id < b.id) {
        best = i;
      }
    }
  }
  return best;
}

class Engine {
 public:
  Engine(Config c_init, EngineOptions options) : options_(std::move(options)) {
    if (options_.budget < 1) throw InvalidBudget("budget must be at least 1");
    if (options_.n_min < 1) throw std::invalid_argument("n_min must be at least 1");
    options_.bounds.validate();
    options_.oracle.validate();
    options_.learner.validate();
    rng_ = derive_rng(options_.seed, "scheduler");

    champion_ = &insert(std::move(c_init));
    champion_->go_live(options_.learner);
    if (options_.variant == EngineVariant::NoChampion) {
      champion_->lease = options_.n_min;
      live_.push_back(champion_);
    }
    const auto initial = options_.initial_pool ? *options_.initial_pool
                                               : oracle(champion_->config, options_.task, options_.oracle);
    for (const auto& c : initial) {
      if (!c.base_namespaces().empty() && c.base_namespaces() != champion_->config.base_namespaces())
        throw std::invalid_argument("pool config " + c.id() + " has different base namespaces");
      if (!records_.count(c.id())) insert(c);
    }
    rebuild_pool();
  }

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Schedules, then returns the incumbent's prediction for x. The label of x
  /// is not read.
  double predict(const Example& x) {
    if (pending_active_) throw std::logic_error("predict() called twice without observe()");
    tracker_.observe(x);
    run_scheduler();

    hashed_.assign(x);
    pending_.clear();
    if (champion_->live() && std::find(live_.begin(), live_.end(), champion_) == live_.end())
      add_pending(*champion_);
    for (ChallengerRecord* r : live_) add_pending(*r);

    std::vector<IncumbentCandidate> cands;
    cands.reserve(pending_.size());
    for (const auto& p : pending_)
      cands.push_back({p.record->id(), bounds_of(*p.record).upper, p.record == champion_});
    incumbent_ = select_incumbent(cands);
    pending_active_ = true;
    return pending_[incumbent_].prediction;
  }

  /// Feeds the label of the example passed to the preceding predict().
  StepRecord observe(double label) {
    if (!pending_active_) throw std::logic_error("observe() called without predict()");
    if (!std::isfinite(label)) throw std::invalid_argument("label must be finite");
    pending_active_ = false;
    range_.observe(label);

    for (auto& p : pending_) {
      ChallengerRecord& r = *p.record;
      record_loss(r.loss, p.prediction, label, range_);
      r.squared_error.add((p.prediction - label) * (p.prediction - label));
      r.model->update(p.features, label);
    }

    ++t_;
    StepRecord rec;
    rec.t = t_;
    rec.incumbent = pending_[incumbent_].record->id();
    rec.prediction = pending_[incumbent_].prediction;
    rec.label = label;
    rec.squared_error = (rec.prediction - label) * (rec.prediction - label);
    rec.clipped_abs_error = clipped_abs_error(rec.prediction, label, range_);

    if (options_.run_tests) run_tests();

    rec.champion = champion_->id();
    rec.pool_size = pool_.size();
    rec.live_size = live_size();
    return rec;
  }

  StepRecord step(const Example& ex) {
    predict(ex);
    return observe(ex.label);
  }

  Bounds bounds_of(const ChallengerRecord& r) const {
    if (r.dim_version != tracker_.version()) {
      r.dim = dimension(r.config, tracker_, options_.learner.bit_precision);
      r.dim_version = tracker_.version();
    }
    return compute_bounds(r.loss, r.dim, std::max<std::size_t>(pool_.size(), 1), options_.bounds, range_);
  }

  const ChallengerRecord& champion() const { return *champion_; }
  const std::string& champion_id() const { return champion_->id(); }

  const ChallengerRecord* find(std::string_view id) const {
    auto it = records_.find(id);
    return it == records_.end() ? nullptr : &it->second;
  }

  /// Challenger pool S in id order.
  std::vector<std::string> pool_ids() const {
    std::vector<std::string> out;
    for (const auto* r : pool_) out.push_back(r->id());
    return out;
  }
  std::size_t pool_size() const { return pool_.size(); }

  /// Ids of every live model, champion included.
  std::vector<std::string> live_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, r] : records_)
      if (r.live()) out.push_back(id);
    return out;
  }
  std::size_t live_size() const {
    std::size_t n = 0;
    for (const auto& [id, r] : records_) n += r.live() ? 1 : 0;
    return n;
  }

  /// The scheduled set B (excludes the champion unless it competes for slots).
  std::vector<std::string> scheduled_ids() const {
    std::vector<std::string> out;
    for (const auto* r : live_) out.push_back(r->id());
    return out;
  }

  /// Every config pooled during the run, eliminated ones included.
  std::vector<const ChallengerRecord*> records() const {
    std::vector<const ChallengerRecord*> out;
    for (const auto& [id, r] : records_) out.push_back(&r);
    return out;
  }

  std::uint64_t steps() const { return t_; }
  const std::vector<PromotionEvent>& promotions() const { return promotions_; }
  const std::vector<EliminationEvent>& eliminations() const { return eliminations_; }
  const std::vector<TestLogEntry>& test_log() const { return test_log_; }
  const LabelRange& label_range() const { return range_; }
  const DimensionTracker& tracker() const { return tracker_; }
  const EngineOptions& options() const { return options_; }

 private:
  struct Pending {
    ChallengerRecord* record;
    SparseVector features;
    double prediction;
  };

  ChallengerRecord& insert(Config c) {
    std::string id = c.id();
    return records_.try_emplace(std::move(id), std::move(c)).first->second;
  }

  void rebuild_pool() {
    pool_.clear();
    for (auto& [id, r] : records_)
      if (!r.eliminated && &r != champion_) pool_.push_back(&r);
  }

  void add_pending(ChallengerRecord& r) {
    Pending p{&r, {}, 0.0};
    featurize(hashed_, r.config, options_.learner.bit_precision, p.features);
    p.prediction = r.model->predict(p.features);
    pending_.push_back(std::move(p));
  }

  void run_scheduler() {
    const bool no_champion = options_.variant == EngineVariant::NoChampion;
    ScheduleOptions so;
    so.budget = options_.budget;
    so.slots = no_champion ? options_.budget : options_.budget - 1;
    so.n_min = options_.n_min;
    so.rule = options_.variant == EngineVariant::Standard ? EvictionRule::Median : EvictionRule::Aggressive;
    std::vector<ChallengerRecord*> sched_pool = pool_;
    if (no_champion) sched_pool.insert(std::lower_bound(sched_pool.begin(), sched_pool.end(), champion_,
                                                        [](auto* a, auto* b) { return a->id() < b->id(); }),
                                       champion_);
    schedule<ChallengerRecord>(
        so, live_, std::span<ChallengerRecord* const>(sched_pool), rng_,
        [this](const ChallengerRecord& r) { return bounds_of(r).upper; },
        [this](ChallengerRecord& r) { r.go_live(options_.learner); },
        [](ChallengerRecord& r) { r.release(); });
  }

  void run_tests() {
    const Bounds champ = bounds_of(*champion_);
    ChallengerRecord* promote = nullptr;
    double promote_upper = kInf;
    bool changed = false;
    for (ChallengerRecord* r : pool_) {
      const Bounds b = bounds_of(*r);
      if (options_.log_tests)
        test_log_.push_back({t_, r->id(), champion_->id(), b, champ, r->live()});
      if (worse_than(b, champ)) {
        r->eliminated = true;
        eliminations_.push_back({t_, r->id()});
        changed = true;
      } else if (r->live() && better_than(b, champ)) {
        // pool_ is in id order, so strict < keeps the smaller id on ties
        if (!promote || b.upper < promote_upper) {
          promote = r;
          promote_upper = b.upper;
        }
      }
    }
    if (promote) {
      ChallengerRecord* old = champion_;
      champion_ = promote;
      promotions_.push_back({t_, old->id(), promote->id()});
      if (options_.variant != EngineVariant::NoChampion) {
        live_.erase(std::find(live_.begin(), live_.end(), promote));
        if (!old->lease) old->lease = options_.n_min;
        live_.push_back(old);
      }
      for (auto& c : oracle(champion_->config, options_.task, options_.oracle))
        if (!records_.count(c.id())) insert(std::move(c));
      changed = true;
    }
    if (changed) rebuild_pool();
  }

  EngineOptions options_;
  std::map<std::string, ChallengerRecord, std::less<>> records_;
  ChallengerRecord* champion_ = nullptr;
  std::vector<ChallengerRecord*> pool_;  // S, id order
  std::vector<ChallengerRecord*> live_;  // B
  Rng rng_;
  LabelRange range_;
  DimensionTracker tracker_;
  HashedExample hashed_;
  std::vector<Pending> pending_;
  std::size_t incumbent_ = 0;
  bool pending_active_ = false;
  std::uint64_t t_ = 0;
  std::vector<PromotionEvent> promotions_;
  std::vector<EliminationEvent> eliminations_;
  std::vector<TestLogEntry> test_log_;
};

}  // namespace chacha
