#pragma once

// Candidate generation around a champion configuration.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chacha/learner.hpp"

namespace chacha {

enum class TuningTask { NI, NI_LR };

inline std::string_view to_string(TuningTask task) { return task == TuningTask::NI ? "ni" : "ni+lr"; }

inline TuningTask parse_tuning_task(std::string_view s) {
  if (s == "ni" || s == "NI") return TuningTask::NI;
  if (s == "ni+lr" || s == "NI_LR" || s == "ni_lr") return TuningTask::NI_LR;
  throw std::invalid_argument("unknown tuning task '" + std::string(s) + "'");
}

struct OracleParams {
  std::vector<double> lr_factors{0.5, 2.0};
  double lr_min = 1.0 / 1024.0;
  double lr_max = 8.0;

  void validate() const {
    if (!(lr_min > 0.0 && lr_min < lr_max)) throw std::invalid_argument("need 0 < lr_min < lr_max");
    for (double f : lr_factors)
      if (!(f > 0.0) || f == 1.0) throw std::invalid_argument("lr factors must be positive and != 1");
  }
};

/// The champion plus one extra pair, for every base-namespace pair it lacks.
inline std::vector<Config> interaction_neighbors(const Config& champion) {
  std::vector<Config> out;
  const auto& base = champion.base_namespaces();
  for (auto u = base.begin(); u != base.end(); ++u)
    for (auto v = std::next(u); v != base.end(); ++v)
      if (!champion.has_interaction(*u, *v)) out.push_back(champion.with_interaction(*u, *v));
  return out;
}

/// Learning rate scaled by each factor and clamped; no-op moves are dropped.
inline std::vector<Config> lr_neighbors(const Config& champion, const OracleParams& params) {
  params.validate();
  std::vector<Config> out;
  for (double f : params.lr_factors) {
    const double lr = std::clamp(f * champion.learning_rate(), params.lr_min, params.lr_max);
    if (lr == champion.learning_rate()) continue;
    out.push_back(champion.with_learning_rate(lr));
  }
  return out;
}

/// Candidate set for a champion, deduplicated and sorted by id.
/// NI_LR adds rate moves and every (interaction move, rate move) combination.
inline std::vector<Config> oracle(const Config& champion, TuningTask task, const OracleParams& params = {}) {
  std::map<std::string, Config> unique;
  auto add = [&](Config c) {
    if (c.id() != champion.id()) unique.emplace(c.id(), std::move(c));
  };
  const auto inter = interaction_neighbors(champion);
  for (const auto& c : inter) add(c);
  if (task == TuningTask::NI_LR) {
    const auto rates = lr_neighbors(champion, params);
    for (const auto& r : rates) {
      add(r);
      for (const auto& c : inter) add(c.with_learning_rate(r.learning_rate()));
    }
  }
  std::vector<Config> out;
  out.reserve(unique.size());
  for (auto& [id, c] : unique) out.push_back(std::move(c));
  return out;
}

}  // namespace chacha
