#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "tdlab/harness.hpp"
#include "tdlab/kernels.hpp"
#include "trial.hpp"

namespace tdlab {

namespace detail {

MetricEvaluator make_evaluator(const ProblemInstance& problem, MetricKind metric) {
  if (metric == MetricKind::rmspbe) {
    if (!problem.system) {
      throw std::invalid_argument("rmspbe requested but the instance has no fixed-point system");
    }
    return MetricEvaluator(*problem.system);
  }
  return MetricEvaluator(metric, problem.env.features, problem.v_star, problem.d_mu);
}

TrialRunner::TrialRunner(const ProblemInstance& problem, const Algorithm& algorithm,
                         const HyperParams& hp, std::uint64_t seed, MetricKind metric,
                         double clamp_ceiling)
    : problem_(problem),
      algorithm_(algorithm),
      hp_(hp),
      evaluator_(make_evaluator(problem, metric)),
      ceiling_(clamp_ceiling),
      rng_(seed),
      state_(problem.env.initial_weights.empty()
                 ? make_learner_state(problem.env.features.d)
                 : make_learner_state(problem.env.initial_weights)) {
  validate(hp_);
  s_ = rng_.uniform_index(problem.env.mdp.n_states);
}

void TrialRunner::step() {
  if (diverged_) return;
  const auto& env = problem_.env;
  const auto sample = sample_step(env.mdp, env.policies, s_, rng_);
  algorithm_.update(state_, sample, env.features(sample.s), env.features(sample.s_next), hp_);
  s_ = sample.s_next;
  if (!kernels::all_finite(state_.w)) diverged_ = true;
}

double TrialRunner::error() {
  if (diverged_) return ceiling_;
  const double v = evaluator_(state_.w);
  if (!std::isfinite(v)) {
    diverged_ = true;
    return ceiling_;
  }
  if (v > ceiling_) {
    ++clamped_steps_;
    return ceiling_;
  }
  return v;
}

}  // namespace detail

double timer_granularity_ms() {
  using clock = std::chrono::steady_clock;
  auto best = clock::duration::max();
  for (int i = 0; i < 64; ++i) {
    const auto a = clock::now();
    auto b = clock::now();
    while (b == a) b = clock::now();
    best = std::min(best, b - a);
  }
  return std::chrono::duration<double, std::milli>(best).count();
}

std::vector<RealtimeResult> run_realtime(const ProblemInstance& problem,
                                         std::span<const RealtimeLearner> learners,
                                         const RealtimeConfig& config) {
  const double c = config.c_ms;
  if (!(c > 0.0)) throw std::invalid_argument("run_realtime: c must be > 0");
  const bool unbounded = std::isinf(c);
  if (unbounded && config.max_samples_per_iteration == 0) {
    throw std::invalid_argument("run_realtime: infinite c needs max_samples_per_iteration > 0");
  }
  const std::size_t cap = config.max_samples_per_iteration == 0
                              ? std::numeric_limits<std::size_t>::max()
                              : config.max_samples_per_iteration;

  std::vector<std::string> warnings;
  if (!config.cost) {
    const double granularity = timer_granularity_ms();
    if (granularity > c / 10.0) {
      warnings.push_back("timer granularity " + std::to_string(granularity) +
                         " ms exceeds c/10 for c = " + std::to_string(c) + " ms");
    }
  }

  using clock = std::chrono::steady_clock;
  std::vector<RealtimeResult> results;
  results.reserve(learners.size());
  for (const auto& learner : learners) {
    if (learner.algorithm == nullptr) throw std::invalid_argument("run_realtime: null algorithm");
    const Algorithm& algorithm = *learner.algorithm;
    detail::TrialRunner runner(problem, algorithm, learner.hp, config.seed, config.metric,
                               config.clamp_ceiling);

    RealtimeResult out;
    out.algorithm = std::string(algorithm.name);
    out.warnings = warnings;
    out.curve.kind = config.metric;
    out.curve.values.reserve(config.n_iterations);
    out.samples_per_iteration.reserve(config.n_iterations);

    auto charge = [&](std::size_t index) {
      if (config.cost) {
        runner.step();
        return config.cost(algorithm, index);
      }
      const auto start = clock::now();
      runner.step();
      return std::chrono::duration<double, std::milli>(clock::now() - start).count();
    };

    double committed = runner.error();
    double pending = committed;
    double busy_until = 0.0;
    std::size_t i = 0;
    while (i < config.n_iterations) {
      const double begin = unbounded ? 0.0 : static_cast<double>(i) * c;
      const double end = unbounded ? c : static_cast<double>(i + 1) * c;
      std::size_t count = 0;
      bool overran = false;
      while (busy_until < end && count < cap) {
        const double start = std::max(busy_until, begin);
        busy_until = start + charge(out.total_samples);
        ++out.total_samples;
        ++count;
        const double err = runner.error();
        if (busy_until <= end || unbounded) {
          committed = err;
        } else {
          pending = err;
          overran = true;
          break;
        }
      }
      out.curve.values.push_back(committed);
      out.samples_per_iteration.push_back(count);
      ++i;
      if (overran) {
        // Paused: iterations that end before the update completes see the old weights.
        while (i < config.n_iterations && static_cast<double>(i + 1) * c < busy_until) {
          out.curve.values.push_back(committed);
          out.samples_per_iteration.push_back(0);
          ++i;
        }
        committed = pending;
      }
      if (unbounded) busy_until = 0.0;
    }
    out.curve.diverged = runner.diverged();
    out.curve.clamped_steps = runner.clamped_steps();
    results.push_back(std::move(out));
  }
  return results;
}

}  // namespace tdlab
