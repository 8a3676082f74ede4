#pragma once

#include "tdlab/harness.hpp"

namespace tdlab::detail {

MetricEvaluator make_evaluator(const ProblemInstance& problem, MetricKind metric);

/// Drives one learner along one behavior trajectory. Shared by run_trial and
/// run_realtime so both consume the random stream identically.
class TrialRunner {
 public:
  TrialRunner(const ProblemInstance& problem, const Algorithm& algorithm, const HyperParams& hp,
              std::uint64_t seed, MetricKind metric, double clamp_ceiling);

  /// Samples the next transition and applies the update. No-op once diverged.
  void step();
  /// Metric at the current weights, clamped to the ceiling.
  double error();

  bool diverged() const { return diverged_; }
  std::size_t clamped_steps() const { return clamped_steps_; }
  const LearnerState& state() const { return state_; }

 private:
  const ProblemInstance& problem_;
  const Algorithm& algorithm_;
  HyperParams hp_;
  MetricEvaluator evaluator_;
  double ceiling_;
  Rng rng_;
  LearnerState state_;
  std::size_t s_ = 0;
  bool diverged_ = false;
  std::size_t clamped_steps_ = 0;
};

}  // namespace tdlab::detail
