#pragma once

// Progressive-validation loss tracking and the confidence-bound tests used to
// promote and eliminate configurations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace chacha {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Running sum and count of per-example losses.
struct LossAccumulator {
  double sum = 0.0;
  std::uint64_t count = 0;

  void add(double loss) {
    sum += loss;
    ++count;
  }
  void reset() { *this = LossAccumulator{}; }
  double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
};

/// Running min/max of every label observed so far, shared by all configs.
struct LabelRange {
  double y_min = kInf;
  double y_max = -kInf;
  std::uint64_t observed = 0;

  void observe(double y) {
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
    ++observed;
  }
  bool initialized() const { return observed > 0; }
  double width() const { return initialized() ? y_max - y_min : 0.0; }
  double clip(double prediction) const { return std::min(std::max(y_min, prediction), y_max); }
};

struct BoundParams {
  double delta = 0.1;
  double loss_scale_factor = 0.05;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
    if (!(loss_scale_factor > 0.0)) throw std::invalid_argument("loss_scale_factor must be positive");
  }
};

inline double clipped_abs_error(double prediction, double label, const LabelRange& range) {
  return std::abs(range.clip(prediction) - label);
}

/// The range must already include `label`.
inline void record_loss(LossAccumulator& acc, double prediction, double label, const LabelRange& range) {
  acc.add(clipped_abs_error(prediction, label, range));
}

/// a * sqrt(d * ln(count * pool_size / delta) / count), a = scale * (y_max - y_min).
/// +inf when nothing has been recorded yet.
inline double epsilon(const LossAccumulator& acc, std::uint64_t d, std::uint64_t pool_size,
                      const BoundParams& params, const LabelRange& range) {
  if (acc.count == 0) return kInf;
  const double a = params.loss_scale_factor * range.width();
  if (a == 0.0) return 0.0;
  const double n = static_cast<double>(acc.count);
  const double pool = static_cast<double>(std::max<std::uint64_t>(pool_size, 1));
  return a * std::sqrt(static_cast<double>(d) * std::log(n * pool / params.delta) / n);
}

struct Bounds {
  double mean = 0.0;
  double eps = kInf;
  double lower = -kInf;
  double upper = kInf;
  std::uint64_t count = 0;

  bool trained() const { return count > 0; }
};

inline Bounds compute_bounds(const LossAccumulator& acc, std::uint64_t d, std::uint64_t pool_size,
                             const BoundParams& params, const LabelRange& range) {
  Bounds b;
  b.count = acc.count;
  if (acc.count == 0) return b;
  b.mean = acc.mean();
  b.eps = epsilon(acc, d, pool_size, params, range);
  b.lower = b.mean - b.eps;
  b.upper = b.mean + b.eps;
  return b;
}

inline double upper_bound(const LossAccumulator& acc, std::uint64_t d, std::uint64_t pool_size,
                          const BoundParams& params, const LabelRange& range) {
  return compute_bounds(acc, d, pool_size, params, range).upper;
}

inline double lower_bound(const LossAccumulator& acc, std::uint64_t d, std::uint64_t pool_size,
                          const BoundParams& params, const LabelRange& range) {
  return compute_bounds(acc, d, pool_size, params, range).lower;
}

/// Promotion test: challenger.upper < champion.lower - champion.eps.
inline bool better_than(const Bounds& challenger, const Bounds& champion) {
  if (!challenger.trained() || !champion.trained()) return false;
  return challenger.upper < champion.lower - champion.eps;
}

/// Elimination test: challenger.lower > champion.upper.
inline bool worse_than(const Bounds& challenger, const Bounds& champion) {
  if (!challenger.trained() || !champion.trained()) return false;
  return challenger.lower > champion.upper;
}

}  // namespace chacha
