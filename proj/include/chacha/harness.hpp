#pragma once

// Experiment runner: ChaCha, its ablations, and the Naive / Exhaustive /
// RandomInit comparators over one dataset, plus scoring and aggregation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chacha/config_oracle.hpp"
#include "chacha/engine.hpp"
#include "chacha/ingest.hpp"
#include "chacha/synth.hpp"

namespace chacha {

enum class Algorithm { ChaCha, Naive, Exhaustive, RandomInit, ChaChaAggressive, ChaChaNoChampion };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ChaCha: return "chacha";
    case Algorithm::Naive: return "naive";
    case Algorithm::Exhaustive: return "exhaustive";
    case Algorithm::RandomInit: return "random-init";
    case Algorithm::ChaChaAggressive: return "chacha-aggressive";
    case Algorithm::ChaChaNoChampion: return "chacha-no-champion";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : {Algorithm::ChaCha, Algorithm::Naive, Algorithm::Exhaustive, Algorithm::RandomInit,
                      Algorithm::ChaChaAggressive, Algorithm::ChaChaNoChampion})
    if (s == to_string(a)) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

enum class DataFormat { Vw, Csv, Synth };

struct RunSpec {
  Algorithm algorithm = Algorithm::ChaCha;
  TuningTask task = TuningTask::NI;
  std::size_t budget = 5;
  std::size_t max_examples = 100000;
  std::uint64_t seed = 0;

  DataFormat format = DataFormat::Synth;
  std::string data_path;      // vw / csv
  std::string target_column;  // csv; empty means the last column
  SynthKind synth_kind = SynthKind::Interaction;
  double synth_noise = 0.1;
  std::size_t synth_namespaces = 3;
  std::uint64_t data_seed = 0;

  std::optional<std::uint64_t> n_min;  // default 5 x raw feature dimensionality
  int bit_precision = 18;
  double delta = 0.1;
  double loss_scale_factor = 0.05;
  bool log_tests = false;

  void validate() const {
    if (budget < 1) throw InvalidBudget("budget must be at least 1");
    if (max_examples < 1) throw std::invalid_argument("max_examples must be at least 1");
  }
};

struct Dataset {
  std::vector<Example> examples;
  std::set<std::string> namespaces;
  std::size_t raw_dimension = 0;  // distinct (namespace, feature) names
};

inline Dataset make_dataset(std::vector<Example> examples) {
  Dataset ds;
  ds.examples = std::move(examples);
  std::set<std::pair<std::string, std::string>> names;
  for (const auto& ex : ds.examples)
    for (const auto& ns : ex.namespaces) {
      ds.namespaces.insert(ns.id);
      for (const auto& f : ns.features) names.emplace(ns.id, f.name);
    }
  ds.raw_dimension = names.size();
  return ds;
}

/// Loads the stream named by the spec, truncated to max_examples. CSV labels
/// go through transform_target over the whole column first.
inline Dataset load_dataset(const RunSpec& spec) {
  spec.validate();
  std::vector<Example> examples;
  switch (spec.format) {
    case DataFormat::Synth: {
      SynthOptions so;
      so.kind = spec.synth_kind;
      so.n_examples = spec.max_examples;
      so.noise_sigma = spec.synth_noise;
      so.seed = spec.data_seed;
      so.namespaces = spec.synth_namespaces;
      examples = synth_stream(so);
      break;
    }
    case DataFormat::Vw: {
      std::ifstream in(spec.data_path);
      if (!in) throw std::runtime_error("cannot open " + spec.data_path);
      examples = read_vw(in, spec.max_examples);
      break;
    }
    case DataFormat::Csv: {
      std::ifstream in(spec.data_path);
      if (!in) throw std::runtime_error("cannot open " + spec.data_path);
      const CsvTable table = read_csv(in);
      if (table.header.empty()) throw MissingTarget("csv header is empty");
      const std::string target = spec.target_column.empty() ? table.header.back() : spec.target_column;
      IngestPolicy policy;
      examples = csv_to_examples(table, target, policy);
      transform_labels(examples, policy);
      if (examples.size() > spec.max_examples) examples.resize(spec.max_examples);
      break;
    }
  }
  if (examples.empty()) throw std::runtime_error("dataset has no examples");
  return make_dataset(std::move(examples));
}

struct RunTrace {
  std::vector<StepRecord> steps;
  std::vector<PromotionEvent> promotions;
  std::vector<EliminationEvent> eliminations;
  std::vector<TestLogEntry> tests;
  std::string final_champion;
  std::uint64_t n_min = 0;
  std::size_t initial_pool_size = 0;
  std::size_t max_live = 0;
  // Smallest progressive MSE among learners that saw every example (NaN if none).
  double best_learner_mse = std::numeric_limits<double>::quiet_NaN();

  double final_mse() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.squared_error;
    return steps.empty() ? 0.0 : s / static_cast<double>(steps.size());
  }
  double final_clipped_mae() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.clipped_abs_error;
    return steps.empty() ? 0.0 : s / static_cast<double>(steps.size());
  }
};

inline Config initial_config(const Dataset& ds) { return Config(ds.namespaces, {}, Config::kDefaultLearningRate); }

/// Engine options for the requested algorithm on this dataset.
inline EngineOptions engine_options(const RunSpec& spec, const Dataset& ds) {
  EngineOptions eo;
  eo.budget = spec.budget;
  eo.task = spec.task;
  eo.bounds.delta = spec.delta;
  eo.bounds.loss_scale_factor = spec.loss_scale_factor;
  eo.learner.bit_precision = spec.bit_precision;
  eo.n_min = spec.n_min.value_or(std::max<std::uint64_t>(1, 5 * ds.raw_dimension));
  eo.seed = spec.seed;
  eo.log_tests = spec.log_tests;

  const Config c_init = initial_config(ds);
  switch (spec.algorithm) {
    case Algorithm::ChaCha: break;
    case Algorithm::ChaChaAggressive: eo.variant = EngineVariant::AggressiveScheduling; break;
    case Algorithm::ChaChaNoChampion: eo.variant = EngineVariant::NoChampion; break;
    case Algorithm::Naive:
      eo.budget = 1;
      eo.run_tests = false;
      eo.initial_pool = std::vector<Config>{};
      break;
    case Algorithm::Exhaustive: {
      auto batch = oracle(c_init, spec.task, eo.oracle);
      eo.budget = batch.size() + 1;
      eo.run_tests = false;
      eo.initial_pool = std::move(batch);
      break;
    }
    case Algorithm::RandomInit: {
      auto batch = oracle(c_init, spec.task, eo.oracle);
      Rng rng = derive_rng(spec.seed, "random_init");
      const std::size_t k = std::min(batch.size(), spec.budget - 1);
      for (std::size_t i = 0; i < k; ++i)  // partial Fisher-Yates
        std::swap(batch[i], batch[i + uniform_index(rng, batch.size() - i)]);
      batch.resize(k);
      eo.run_tests = false;
      eo.initial_pool = std::move(batch);
      break;
    }
  }
  return eo;
}

inline RunTrace run(const RunSpec& spec, const Dataset& ds) {
  spec.validate();
  const EngineOptions eo = engine_options(spec, ds);
  Engine engine(initial_config(ds), eo);

  RunTrace trace;
  trace.n_min = eo.n_min;
  trace.initial_pool_size = engine.pool_size();
  const std::size_t n = std::min(ds.examples.size(), spec.max_examples);
  trace.steps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    trace.steps.push_back(engine.step(ds.examples[i]));
    trace.max_live = std::max(trace.max_live, trace.steps.back().live_size);
  }
  trace.promotions = engine.promotions();
  trace.eliminations = engine.eliminations();
  trace.tests = engine.test_log();
  trace.final_champion = engine.champion_id();
  for (const auto* r : engine.records())
    if (r->live() && r->squared_error.count == n) {
      const double mse = r->squared_error.mean();
      if (std::isnan(trace.best_learner_mse) || mse < trace.best_learner_mse) trace.best_learner_mse = mse;
    }
  return trace;
}

inline RunTrace run(const RunSpec& spec) { return run(spec, load_dataset(spec)); }

/// (naive - alg) / (naive - exhaustive); nullopt when naive == exhaustive.
inline std::optional<double> normalized_score(double loss_alg, double loss_naive, double loss_exhaustive) {
  const double denom = loss_naive - loss_exhaustive;
  if (denom == 0.0) return std::nullopt;
  return (loss_naive - loss_alg) / denom;
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) deviation; 0 for a single value
  std::size_t n = 0;
};

inline Summary aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate needs at least one value");
  Summary s;
  s.n = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

struct TraceAggregate {
  Summary loss;
  std::optional<Summary> score;  // absent when the score is undefined
};

/// Final progressive MSE across seeds, and the normalized score against the
/// given Naive and Exhaustive losses.
inline TraceAggregate aggregate(std::span<const RunTrace> traces, double loss_naive, double loss_exhaustive) {
  std::vector<double> losses, scores;
  bool defined = true;
  for (const auto& t : traces) {
    losses.push_back(t.final_mse());
    if (auto s = normalized_score(t.final_mse(), loss_naive, loss_exhaustive)) {
      scores.push_back(*s);
    } else {
      defined = false;
    }
  }
  TraceAggregate agg;
  agg.loss = aggregate(losses);
  if (defined) agg.score = aggregate(scores);
  return agg;
}

struct SweepResult {
  std::vector<RunTrace> runs;  // one per seed
  RunTrace naive;
  RunTrace exhaustive;
  TraceAggregate aggregate;
};

/// Runs spec.algorithm for seeds spec.seed .. spec.seed + seeds - 1 on one
/// dataset, plus Naive and Exhaustive once (neither depends on the seed).
inline SweepResult sweep(const RunSpec& spec, std::size_t seeds) {
  if (seeds < 1) throw std::invalid_argument("sweep needs at least one seed");
  const Dataset ds = load_dataset(spec);
  SweepResult out;
  RunSpec s = spec;
  s.algorithm = Algorithm::Naive;
  out.naive = run(s, ds);
  s.algorithm = Algorithm::Exhaustive;
  out.exhaustive = run(s, ds);
  for (std::size_t i = 0; i < seeds; ++i) {
    s = spec;
    s.seed = spec.seed + i;
    out.runs.push_back(run(s, ds));
  }
  out.aggregate = chacha::aggregate(std::span<const RunTrace>(out.runs), out.naive.final_mse(),
                                    out.exhaustive.final_mse());
  return out;
}

}  // namespace chacha
