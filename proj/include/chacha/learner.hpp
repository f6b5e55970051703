#pragma once

// Hashed linear regressor trained by online gradient descent, with pairwise
// namespace-interaction crossing.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chacha/hashing.hpp"
#include "chacha/ingest.hpp"

namespace chacha {

using NamespaceId = std::string;
/// Unordered namespace pair stored with first < second.
using InteractionPair = std::pair<NamespaceId, NamespaceId>;

/// A point in the search space: which namespace pairs are crossed, and the
/// learning rate. Two configs are equal iff their ids are equal.
class Config {
 public:
  static constexpr double kDefaultLearningRate = 0.5;

  Config() = default;

  explicit Config(std::set<NamespaceId> base_namespaces, std::set<InteractionPair> interactions = {},
                  double learning_rate = kDefaultLearningRate)
      : base_(std::move(base_namespaces)), learning_rate_(learning_rate) {
    for (const auto& [u, v] : interactions) interactions_.insert(canonical_pair(u, v));
    validate();
    id_ = make_id();
  }

  static InteractionPair canonical_pair(std::string_view u, std::string_view v) {
    if (u == v) throw std::invalid_argument("interaction pair needs two distinct namespaces");
    return u < v ? InteractionPair{std::string(u), std::string(v)}
                 : InteractionPair{std::string(v), std::string(u)};
  }

  const std::set<NamespaceId>& base_namespaces() const { return base_; }
  const std::set<InteractionPair>& interactions() const { return interactions_; }
  double learning_rate() const { return learning_rate_; }
  const std::string& id() const { return id_; }

  bool has_interaction(std::string_view u, std::string_view v) const {
    return interactions_.count(canonical_pair(u, v)) > 0;
  }

  Config with_interaction(std::string_view u, std::string_view v) const {
    auto pairs = interactions_;
    pairs.insert(canonical_pair(u, v));
    return Config(base_, std::move(pairs), learning_rate_);
  }

  Config with_learning_rate(double lr) const { return Config(base_, interactions_, lr); }

  friend bool operator==(const Config& a, const Config& b) { return a.id_ == b.id_; }

 private:
  static void check_namespace_id(const NamespaceId& ns) {
    if (ns.empty()) throw std::invalid_argument("empty namespace id");
    for (char c : ns)
      if (c == '*' || c == '+' || c == ';' || c == ',' || detail::is_space(c))
        throw std::invalid_argument("namespace id '" + ns + "' contains a reserved character");
  }

  void validate() const {
    for (const auto& ns : base_) check_namespace_id(ns);
    for (const auto& [u, v] : interactions_)
      if (!base_.count(u) || !base_.count(v))
        throw std::invalid_argument("interaction " + u + "*" + v + " uses a namespace outside the base set");
    if (!(learning_rate_ > 0.0) || !std::isfinite(learning_rate_))
      throw std::invalid_argument("learning rate must be positive and finite");
  }

  // "a*b+a*c;lr=0.5", or "none;lr=0.5" without interactions.
  std::string make_id() const {
    std::string out;
    for (const auto& [u, v] : interactions_) {
      if (!out.empty()) out += '+';
      out += u;
      out += '*';
      out += v;
    }
    if (out.empty()) out = "none";
    out += ";lr=";
    out += detail::format_real(learning_rate_);
    return out;
  }

  std::set<NamespaceId> base_;
  std::set<InteractionPair> interactions_;
  double learning_rate_ = kDefaultLearningRate;
  std::string id_ = "none;lr=0.5";
};

// ---------------------------------------------------------------------------
// Featurization

struct SparseEntry {
  std::uint32_t index;
  double value;
};
using SparseVector = std::vector<SparseEntry>;

inline constexpr std::uint32_t kBiasIndex = 0;

/// Index of the crossed feature (ns_u, f_u) x (ns_v, f_v); argument order does not matter.
inline std::uint64_t interaction_index(std::string_view ns_u, std::string_view f_u, std::string_view ns_v,
                                       std::string_view f_v, int bit_precision) {
  if (std::pair(ns_v, f_v) < std::pair(ns_u, f_u)) {
    std::swap(ns_u, ns_v);
    std::swap(f_u, f_v);
  }
  const std::string_view parts[] = {ns_u, f_u, ns_v, f_v};
  return hash_index(parts, bit_precision);
}

/// An example with the FNV prefix state of every (namespace, feature) cached,
/// so every config's featurization shares the string hashing.
/// Holds views into the source example, which must outlive it.
class HashedExample {
 public:
  struct Entry {
    std::string_view name;
    double value;
    Fnv1a64 prefix;  // state after "ns<US>name"
  };
  struct Group {
    std::string_view id;
    std::vector<Entry> entries;
  };

  HashedExample() = default;
  explicit HashedExample(const Example& ex) { assign(ex); }

  void assign(const Example& ex) {
    groups_.resize(ex.namespaces.size());
    for (std::size_t g = 0; g < ex.namespaces.size(); ++g) {
      const Namespace& ns = ex.namespaces[g];
      Group& grp = groups_[g];
      grp.id = ns.id;
      grp.entries.clear();
      Fnv1a64 ns_state;
      ns_state.update(ns.id).update(kPartSeparator);
      for (const auto& f : ns.features) {
        Fnv1a64 h = ns_state;
        h.update(f.name);
        grp.entries.push_back({f.name, f.value, h});
      }
    }
  }

  const Group* find(std::string_view id) const {
    for (const auto& g : groups_)
      if (g.id == id) return &g;
    return nullptr;
  }

  std::span<const Group> groups() const { return groups_; }

 private:
  std::vector<Group> groups_;
};

/// Bias at index 0, every base-namespace feature, then the full cross product
/// for each configured pair. Namespaces outside the config are dropped.
inline void featurize(const HashedExample& ex, const Config& config, int bit_precision, SparseVector& out) {
  out.clear();
  out.push_back({kBiasIndex, 1.0});
  for (const auto& grp : ex.groups()) {
    if (!config.base_namespaces().count(std::string(grp.id))) continue;
    for (const auto& e : grp.entries)
      out.push_back({static_cast<std::uint32_t>(mask_bits(e.prefix.digest(), bit_precision)), e.value});
  }
  for (const auto& [u, v] : config.interactions()) {
    // u < v, so (u, *) sorts before (v, *) and u's prefix state comes first.
    const auto* gu = ex.find(u);
    const auto* gv = ex.find(v);
    if (!gu || !gv) continue;
    for (const auto& a : gu->entries) {
      Fnv1a64 left = a.prefix;
      left.update(kPartSeparator).update(gv->id).update(kPartSeparator);
      for (const auto& b : gv->entries) {
        Fnv1a64 h = left;
        h.update(b.name);
        out.push_back({static_cast<std::uint32_t>(mask_bits(h.digest(), bit_precision)), a.value * b.value});
      }
    }
  }
}

inline SparseVector featurize(const Example& ex, const Config& config, int bit_precision) {
  SparseVector out;
  featurize(HashedExample(ex), config, bit_precision, out);
  return out;
}

// ---------------------------------------------------------------------------
// Model

class NumericOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearnerOptions {
  int bit_precision = 18;
  double clip_bound = 1e3;  // cap on |step * residual|

  void validate() const {
    if (bit_precision < 1 || bit_precision > 30) throw std::invalid_argument("bit_precision must be in [1, 30]");
    if (!(clip_bound > 0.0)) throw std::invalid_argument("clip_bound must be positive");
  }
};

/// Dense-weight linear model. Squared-loss GD with step
/// learning_rate / sqrt(update_count + 1).
class LinearModel {
 public:
  explicit LinearModel(Config config, LearnerOptions options = {})
      : config_(std::move(config)), options_(options) {
    options_.validate();
    weights_.assign(std::size_t{1} << options_.bit_precision, 0.0);
  }

  double predict(std::span<const SparseEntry> x) const {
    double acc = 0.0;
    for (const auto& e : x) {
      assert(e.index < weights_.size());
      acc += weights_[e.index] * e.value;
    }
    return acc;
  }

  double step_size() const {
    return config_.learning_rate() / std::sqrt(static_cast<double>(update_count_ + 1));
  }

  /// One predict-then-update cycle on (x, y).
  void update(std::span<const SparseEntry> x, double y) {
    const double residual = predict(x) - y;
    double scaled = step_size() * residual;
    scaled = std::clamp(scaled, -options_.clip_bound, options_.clip_bound);
    ++update_count_;
    if (scaled == 0.0) return;
    for (const auto& e : x) weights_[e.index] -= scaled * e.value;
    for (const auto& e : x)
      if (!std::isfinite(weights_[e.index]))
        throw NumericOverflow("non-finite weight after update of config " + config_.id() +
                              " (input scaling too large?)");
  }

  const Config& config() const { return config_; }
  const LearnerOptions& options() const { return options_; }
  int bit_precision() const { return options_.bit_precision; }
  std::uint64_t update_count() const { return update_count_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }

 private:
  Config config_;
  LearnerOptions options_;
  std::vector<double> weights_;
  std::uint64_t update_count_ = 0;
};

// ---------------------------------------------------------------------------
// Dimensionality

/// Distinct feature names seen per namespace.
class DimensionTracker {
 public:
  void observe(const Example& ex) {
    for (const auto& ns : ex.namespaces) {
      auto it = seen_.find(ns.id);
      if (it == seen_.end()) it = seen_.emplace(ns.id, std::unordered_set<std::string>{}).first;
      for (const auto& f : ns.features)
        if (it->second.insert(f.name).second) ++version_;
    }
    ++examples_;
  }

  std::uint64_t count(std::string_view ns) const {
    auto it = seen_.find(ns);
    return it == seen_.end() ? 0 : it->second.size();
  }

  /// Bumped whenever any count changes.
  std::uint64_t version() const { return version_; }
  std::uint64_t examples_seen() const { return examples_; }

 private:
  std::map<std::string, std::unordered_set<std::string>, std::less<>> seen_;
  std::uint64_t version_ = 0;
  std::uint64_t examples_ = 0;
};

/// Base features + sum over pairs of |u|*|v| + bias, capped at 2^bit_precision.
inline std::uint64_t dimension(const Config& config, const DimensionTracker& tracker, int bit_precision) {
  const std::uint64_t cap = std::uint64_t{1} << bit_precision;
  std::uint64_t d = 1;
  for (const auto& ns : config.base_namespaces()) d += tracker.count(ns);
  for (const auto& [u, v] : config.interactions()) {
    const std::uint64_t cu = tracker.count(u), cv = tracker.count(v);
    if (cu != 0 && cv > cap / cu) return cap;
    d += cu * cv;
    if (d >= cap) return cap;
  }
  return std::min(d, cap);
}

}  // namespace chacha
