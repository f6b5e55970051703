// chacha: run the online AutoML engine and its baselines, score traces, and
// sweep seeds.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chacha/chacha.hpp"
#include "chacha/trace_io.hpp"

using namespace chacha;

namespace {

struct RunArgs {
  std::string algo = "chacha";
  std::string task = "ni";
  std::string format = "synth:interaction";
  std::string data;
  std::string target;
  std::size_t budget = 5;
  std::size_t max_examples = 100000;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t n_min = 0;
  int bit_precision = 18;
  double noise = 0.1;
  std::size_t namespaces = 3;
};

void add_run_options(CLI::App& cmd, RunArgs& a) {
  cmd.add_option("--algo", a.algo, "chacha | naive | exhaustive | random-init | chacha-aggressive | chacha-no-champion")
      ->capture_default_str();
  cmd.add_option("--task", a.task, "ni | ni+lr")->capture_default_str();
  cmd.add_option("--format", a.format, "vw | csv | synth:linear | synth:interaction | synth:drift")
      ->capture_default_str();
  cmd.add_option("--data", a.data, "input file for vw / csv");
  cmd.add_option("--target", a.target, "csv target column (default: last)");
  cmd.add_option("--budget", a.budget, "live model budget b")->capture_default_str();
  cmd.add_option("--max-examples", a.max_examples, "stream length cap")->capture_default_str();
  cmd.add_option("--seed", a.seed, "engine seed")->capture_default_str();
  cmd.add_option("--data-seed", a.data_seed, "synthetic stream seed")->capture_default_str();
  cmd.add_option("--n-min", a.n_min, "minimum resource lease (default 5 x raw features)");
  cmd.add_option("--bit-precision", a.bit_precision, "hashed weight bits")->capture_default_str();
  cmd.add_option("--noise", a.noise, "synthetic label noise sigma")->capture_default_str();
  cmd.add_option("--namespaces", a.namespaces, "synthetic namespace count")->capture_default_str();
}

RunSpec to_spec(const RunArgs& a) {
  RunSpec s;
  s.algorithm = parse_algorithm(a.algo);
  s.task = parse_tuning_task(a.task);
  s.budget = a.budget;
  s.max_examples = a.max_examples;
  s.seed = a.seed;
  s.data_seed = a.data_seed;
  s.bit_precision = a.bit_precision;
  s.synth_noise = a.noise;
  s.synth_namespaces = a.namespaces;
  if (a.n_min > 0) s.n_min = a.n_min;
  if (a.format == "vw") {
    s.format = DataFormat::Vw;
  } else if (a.format == "csv") {
    s.format = DataFormat::Csv;
  } else if (a.format.rfind("synth:", 0) == 0) {
    s.format = DataFormat::Synth;
    s.synth_kind = parse_synth_kind(a.format.substr(6));
  } else {
    throw std::invalid_argument("unknown format '" + a.format + "'");
  }
  if (s.format != DataFormat::Synth && a.data.empty()) throw std::invalid_argument("--data is required for " + a.format);
  s.data_path = a.data;
  s.target_column = a.target;
  return s;
}

std::vector<StepRecord> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_trace_csv(in);
}

int cmd_run(const RunArgs& a, const std::string& out_path, const std::string& summary_path) {
  const RunSpec spec = to_spec(a);
  const RunTrace trace = run(spec);
  if (out_path.empty() || out_path == "-") {
    write_trace_csv(std::cout, trace.steps);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    write_trace_csv(out, trace.steps);
  }
  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    if (!out) throw std::runtime_error("cannot write " + summary_path);
    out << summary_json(spec, trace).dump(2) << '\n';
  }
  std::fprintf(stderr, "%s: %zu examples, mse %.6g, champion %s, %zu promotions, %zu eliminations\n",
               std::string(to_string(spec.algorithm)).c_str(), trace.steps.size(), trace.final_mse(),
               trace.final_champion.c_str(), trace.promotions.size(), trace.eliminations.size());
  return 0;
}

int cmd_score(const std::string& naive, const std::string& exhaustive, const std::string& alg) {
  const double ln = progressive_mse(load_trace(naive));
  const double le = progressive_mse(load_trace(exhaustive));
  const double la = progressive_mse(load_trace(alg));
  if (const auto s = normalized_score(la, ln, le)) {
    std::printf("score %.10g\n", *s);
  } else {
    std::printf("score undefined\n");
  }
  return 0;
}

int cmd_sweep(const RunArgs& a, std::size_t seeds) {
  const SweepResult res = sweep(to_spec(a), seeds);
  std::printf("naive_loss %.10g\n", res.naive.final_mse());
  std::printf("exhaustive_loss %.10g\n", res.exhaustive.final_mse());
  for (std::size_t i = 0; i < res.runs.size(); ++i)
    std::printf("seed %llu loss %.10g champion %s\n", static_cast<unsigned long long>(a.seed + i),
                res.runs[i].final_mse(), res.runs[i].final_champion.c_str());
  std::printf("loss_mean %.10g\nloss_std %.10g\n", res.aggregate.loss.mean, res.aggregate.loss.stddev);
  if (res.aggregate.score) {
    std::printf("score_mean %.10g\nscore_std %.10g\n", res.aggregate.score->mean, res.aggregate.score->stddev);
  } else {
    std::printf("score_mean undefined\nscore_std undefined\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online AutoML over namespace interactions with a fixed live-model budget"};
  app.require_subcommand(1);

  RunArgs run_args;
  std::string out_path, summary_path;
  auto* run_cmd = app.add_subcommand("run", "Run one algorithm over a stream and write its per-step trace");
  add_run_options(*run_cmd, run_args);
  run_cmd->add_option("--out", out_path, "trace CSV path ('-' for stdout)");
  run_cmd->add_option("--summary", summary_path, "run summary JSON path");

  std::string naive, exhaustive, alg;
  auto* score_cmd = app.add_subcommand("score", "Normalized score of a trace against Naive and Exhaustive traces");
  score_cmd->add_option("--naive", naive, "Naive trace CSV")->required();
  score_cmd->add_option("--exhaustive", exhaustive, "Exhaustive trace CSV")->required();
  score_cmd->add_option("--alg", alg, "trace CSV to score")->required();

  RunArgs sweep_args;
  std::size_t seeds = 5;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run several seeds and report mean / std of loss and score");
  add_run_options(*sweep_cmd, sweep_args);
  sweep_cmd->add_option("--seeds", seeds, "number of seeds, starting at --seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run_args, out_path, summary_path);
    if (*score_cmd) return cmd_score(naive, exhaustive, alg);
    if (*sweep_cmd) return cmd_sweep(sweep_args, seeds);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
