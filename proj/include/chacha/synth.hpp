#pragma once

// Seeded synthetic regression streams with a known best configuration.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chacha/ingest.hpp"
#include "chacha/random.hpp"

namespace chacha {

enum class SynthKind {
  Linear,       // y = w.x + noise: no interaction helps
  Interaction,  // y = x_a . x_b + noise: needs the a*b crossing
  Drift,        // a*b for the first half of the stream, a*c afterwards
};

inline std::string_view to_string(SynthKind k) {
  switch (k) {
    case SynthKind::Linear: return "linear";
    case SynthKind::Interaction: return "interaction";
    case SynthKind::Drift: return "drift";
  }
  return "?";
}

inline SynthKind parse_synth_kind(std::string_view s) {
  if (s == "linear") return SynthKind::Linear;
  if (s == "interaction") return SynthKind::Interaction;
  if (s == "drift") return SynthKind::Drift;
  throw std::invalid_argument("unknown synthetic stream kind '" + std::string(s) + "'");
}

struct SynthOptions {
  SynthKind kind = SynthKind::Interaction;
  std::size_t n_examples = 1000;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  std::size_t namespaces = 3;  // ids 'a', 'b', 'c', ...
  std::size_t features_per_namespace = 3;
};

/// Features are iid uniform on [-1, 1], named f0, f1, ... in every namespace.
/// x_a . x_b is the dot product of the a and b feature vectors.
inline std::vector<Example> synth_stream(const SynthOptions& opts) {
  if (opts.n_examples < 1) throw std::invalid_argument("n_examples must be >= 1");
  if (opts.namespaces < 3 || opts.namespaces > 26) throw std::invalid_argument("namespaces must be in [3, 26]");
  if (opts.features_per_namespace < 1) throw std::invalid_argument("features_per_namespace must be >= 1");

  Rng rng = derive_rng(opts.seed, "synth");
  const std::size_t m = opts.namespaces, k = opts.features_per_namespace;

  std::vector<double> w(m * k);
  if (opts.kind == SynthKind::Linear)
    for (auto& wi : w) wi = standard_normal(rng);

  std::vector<std::string> names(k);
  for (std::size_t j = 0; j < k; ++j) names[j] = "f" + std::to_string(j);

  std::vector<Example> out;
  out.reserve(opts.n_examples);
  std::vector<double> x(m * k);
  for (std::size_t t = 0; t < opts.n_examples; ++t) {
    for (auto& xi : x) xi = uniform(rng, -1.0, 1.0);
    auto dot = [&](std::size_t u, std::size_t v) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += x[u * k + j] * x[v * k + j];
      return s;
    };
    double y = 0.0;
    switch (opts.kind) {
      case SynthKind::Linear:
        for (std::size_t i = 0; i < x.size(); ++i) y += w[i] * x[i];
        break;
      case SynthKind::Interaction:
        y = dot(0, 1);
        break;
      case SynthKind::Drift:
        y = 2 * t < opts.n_examples ? dot(0, 1) : dot(0, 2);
        break;
    }
    y += opts.noise_sigma * standard_normal(rng);

    Example ex;
    ex.label = y;
    ex.namespaces.resize(m);
    for (std::size_t u = 0; u < m; ++u) {
      ex.namespaces[u].id = std::string(1, static_cast<char>('a' + u));
      ex.namespaces[u].features.reserve(k);
      for (std::size_t j = 0; j < k; ++j) ex.namespaces[u].features.push_back({names[j], x[u * k + j]});
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace chacha
