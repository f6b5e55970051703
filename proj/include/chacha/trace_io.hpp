#pragma once

// Trace CSV and run-summary JSON.

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chacha/harness.hpp"
#include "chacha/ingest.hpp"

namespace chacha {

inline constexpr std::string_view kTraceHeader =
    "t,incumbent,pred,label,sq_err,clipped_abs_err,champion,pool_size,live_size";

/// Reals are written in shortest round-trip form, so a trace read back gives
/// bit-identical losses.
inline void write_trace_csv(std::ostream& out, std::span<const StepRecord> steps) {
  out << kTraceHeader << '\n';
  for (const auto& r : steps) {
    out << r.t << ',' << r.incumbent << ',' << detail::format_real(r.prediction) << ','
        << detail::format_real(r.label) << ',' << detail::format_real(r.squared_error) << ','
        << detail::format_real(r.clipped_abs_error) << ',' << r.champion << ',' << r.pool_size << ','
        << r.live_size << '\n';
  }
}

inline std::vector<StepRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw std::runtime_error("unexpected trace header: " + line);

  std::vector<StepRecord> out;
  std::size_t line_no = 1;
  auto real = [&](const std::string& s) {
    auto v = detail::parse_real(s);
    if (!v) throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return *v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_record(line);
    if (cells.size() != 9) throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 9 cells");
    StepRecord r;
    r.t = static_cast<std::uint64_t>(real(cells[0]));
    r.incumbent = cells[1];
    r.prediction = real(cells[2]);
    r.label = real(cells[3]);
    r.squared_error = real(cells[4]);
    r.clipped_abs_error = real(cells[5]);
    r.champion = cells[6];
    r.pool_size = static_cast<std::size_t>(real(cells[7]));
    r.live_size = static_cast<std::size_t>(real(cells[8]));
    out.push_back(std::move(r));
  }
  return out;
}

inline double progressive_mse(std::span<const StepRecord> steps) {
  double s = 0.0;
  for (const auto& r : steps) s += r.squared_error;
  return steps.empty() ? 0.0 : s / static_cast<double>(steps.size());
}

inline nlohmann::json summary_json(const RunSpec& spec, const RunTrace& trace) {
  nlohmann::json j;
  j["algorithm"] = std::string(to_string(spec.algorithm));
  j["task"] = std::string(to_string(spec.task));
  j["budget"] = spec.budget;
  j["seed"] = spec.seed;
  j["bit_precision"] = spec.bit_precision;
  j["delta"] = spec.delta;
  j["loss_scale_factor"] = spec.loss_scale_factor;
  j["n_min"] = trace.n_min;
  j["examples"] = trace.steps.size();
  j["initial_pool_size"] = trace.initial_pool_size;
  j["max_live"] = trace.max_live;
  j["final_mse"] = trace.final_mse();
  j["final_clipped_mae"] = trace.final_clipped_mae();
  j["final_champion"] = trace.final_champion;
  auto& promos = j["promotions"] = nlohmann::json::array();
  for (const auto& p : trace.promotions) promos.push_back({{"t", p.t}, {"old", p.old_champion}, {"new", p.new_champion}});
  auto& elims = j["eliminations"] = nlohmann::json::array();
  for (const auto& e : trace.eliminations) elims.push_back({{"t", e.t}, {"id", e.id}});
  return j;
}

}  // namespace chacha
