#pragma once

#include <cmath>
#include <vector>

#include "tdlab/harness.hpp"
#include "tdlab/mdp.hpp"

namespace tdlab::testing {

/// Random environment with its samples and features, for driving learners directly.
struct Stream {
  Environment env;
  std::vector<TransitionSample> samples;
};

inline Stream random_stream(std::size_t n_states, std::size_t n_actions, FeatureKind kind,
                            bool on_policy, std::size_t n_steps, std::uint64_t seed) {
  Stream out;
  out.env.mdp = generate_random_mdp(n_states, n_actions, std::min<std::size_t>(4, n_states), 2,
                                    seed);
  out.env.features = make_features(out.env.mdp, kind, seed + 1);
  out.env.policies = make_policies(out.env.mdp, 0.9, on_policy ? 0.9 : 0.8, seed + 2);
  Rng rng(seed + 3);
  std::size_t s = rng.uniform_index(n_states);
  out.samples.reserve(n_steps);
  for (std::size_t t = 0; t < n_steps; ++t) {
    out.samples.push_back(sample_step(out.env.mdp, out.env.policies, s, rng));
    s = out.samples.back().s_next;
  }
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Mean and standard error of the batch means of `values` split into `batches` blocks.
inline std::pair<double, double> batch_mean(const std::vector<double>& values,
                                            std::size_t batches) {
  const std::size_t per = values.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < per; ++i) means[b] += values[b * per + i];
    means[b] /= static_cast<double>(per);
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(batches - 1);
  return {mean, std::sqrt(var / static_cast<double>(batches))};
}

}  // namespace tdlab::testing
