#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdlab/learners.hpp"
#include "tdlab/mdp.hpp"
#include "tdlab/metrics.hpp"
#include "tdlab/oracle.hpp"

namespace tdlab {

enum class Setting { on_policy, off_policy, baird };

std::string_view to_string(Setting setting);
/// Accepts "on-policy", "off-policy", "baird".
Setting parse_setting(std::string_view name);

/// {0.1 * 2^j : j = -8..6}, 15 values.
std::vector<double> default_alphas();
/// {2^j : j in {-4, -2, -1, 0, 1, 2, 4}}.
std::vector<double> default_etas();
/// 0, 0.1, ..., 0.9, 0.91, ..., 1.0 (20 values).
std::vector<double> default_lambdas();
/// {0.1 * 2^j : j = -10..0}.
std::vector<double> baird_alphas();
/// {2^j : j in {-16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16, 32}}.
std::vector<double> baird_etas();

/**
 * Hyperparameter grid. Cells are numbered alpha-major, then eta, with lambda
 * varying fastest.
 */
struct SweepGrid {
  std::vector<double> alphas = default_alphas();
  std::vector<double> etas = default_etas();
  std::vector<double> lambdas = default_lambdas();

  static SweepGrid baird();

  std::size_t size() const { return alphas.size() * etas.size() * lambdas.size(); }

  struct Coord {
    std::size_t alpha;
    std::size_t eta;
    std::size_t lambda;
  };
  Coord coord(std::size_t cell) const;
  std::size_t cell(Coord c) const;
  HyperParams params(std::size_t cell, double beta_scale) const;

  friend bool operator==(const SweepGrid&, const SweepGrid&) = default;
};

/// Throws std::invalid_argument on empty lists, alpha/eta <= 0 or lambda
/// outside [0, 1].
void validate(const SweepGrid& grid);

/// Shape of the random MDPs and policies.
struct EnvironmentParams {
  std::size_t n_states = 30;
  std::size_t n_actions = 3;
  std::size_t branching = 4;
  std::size_t n_terminating = 2;
  double base_pi = 0.9;
  double base_mu = 0.8;
  /// 0 selects the representation default (0.99 for binary, 0.9 otherwise).
  double gamma = 0.0;

  friend bool operator==(const EnvironmentParams&, const EnvironmentParams&) = default;
};

struct RunConfig {
  std::string algorithm = "td";
  Setting setting = Setting::off_policy;
  FeatureKind representation = FeatureKind::tabular;
  MetricKind metric = MetricKind::mave;
  std::size_t n_steps = 2000;
  std::size_t n_runs = 100;
  std::size_t n_mdps = 30;
  std::uint64_t seed_root = 0;
  double clamp_ceiling = 1e6;
  double beta_scale = 0.5;
  EnvironmentParams env;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws std::invalid_argument for unknown algorithms, on-policy-only
/// algorithms outside the on-policy setting, mave on Baird's problem, custom
/// features on random MDPs, zero counts or a non-positive ceiling.
void validate(const RunConfig& config);

/// Trial seed for (mdp i, run j, grid cell k).
std::uint64_t trial_seed(std::uint64_t seed_root, std::size_t mdp, std::size_t run,
                         std::size_t cell);

/// An environment with the oracle quantities its metric needs.
struct ProblemInstance {
  Environment env;
  std::vector<double> v_star;
  std::vector<double> d_mu;
  /// lambda = 0 system; present when the metric is rmspbe.
  std::optional<FixedPointSystem> system;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  /// Seeds drawn and discarded before `seed` (reducible chain, singular
  /// system, or a target below the mave floor).
  std::vector<std::uint64_t> rejected_seeds;
  /// Hash of the serialized environment.
  std::string fingerprint;
};

/// Instance `mdp_index` of the configured setting. Random MDPs are re-drawn
/// until usable (at most 1000 attempts).
ProblemInstance make_instance(const RunConfig& config, std::size_t mdp_index);
std::vector<ProblemInstance> make_instances(const RunConfig& config);

/// One continuing trajectory from a uniform start state, one metric value
/// after every update. Non-finite weights flag divergence and the rest of the
/// curve is filled with the ceiling; values above the ceiling are clamped.
ErrorCurve run_trial(const ProblemInstance& problem, const Algorithm& algorithm,
                     const HyperParams& hp, std::size_t n_steps, std::uint64_t seed,
                     MetricKind metric, double clamp_ceiling = 1e6);

/// Pointwise mean and standard error s / sqrt(n) (zero when n = 1).
struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::size_t n = 0;
};

/// Exactly independent of input order: each step's values are sorted before
/// a compensated sum. All curves must have the same length.
AggregateCurve aggregate(std::span<const ErrorCurve> curves);
AggregateCurve aggregate(std::span<const std::vector<double>> curves);

/// Mean of `curve` over its last half (steps n/2 .. n-1).
double last_half_mean(std::span<const double> curve);

struct CellResult {
  std::size_t index = 0;
  HyperParams params;
  AggregateCurve curve;
  double objective = 0.0;
  std::size_t diverged_runs = 0;
  std::size_t clamped_runs = 0;
};

struct SweepResult {
  RunConfig config;
  SweepGrid grid;
  std::vector<CellResult> cells;
  std::size_t best_cell = 0;
  std::vector<ProblemInstance> instances;

  const CellResult& best() const { return cells.at(best_cell); }
  std::size_t diverged_runs() const;
  std::size_t clamped_runs() const;
};

/// Smallest objective; ties go to the smallest (alpha, eta, lambda).
std::size_t select_best(std::span<const CellResult> cells);

struct SweepOptions {
  /// Worker threads; 0 means hardware concurrency.
  std::size_t jobs = 1;
  /// Called once per cell, in cell order, with the raw per-(mdp, run) curves
  /// (mdp-major). Runs on the calling thread.
  std::function<void(const CellResult&, std::span<const ErrorCurve>)> on_cell;
};

/// Every cell over every (mdp, run). Curves are reduced per cell and the raw
/// curves dropped once `on_cell` returns.
SweepResult run_sweep(const RunConfig& config, const SweepGrid& grid,
                      const SweepOptions& options = {});
/// Same, reusing prepared instances (must come from make_instances(config)).
SweepResult run_sweep(const RunConfig& config, const SweepGrid& grid,
                      std::vector<ProblemInstance> instances, const SweepOptions& options = {});

enum class SweepParam { alpha, eta, lambda };
std::string_view to_string(SweepParam param);

struct SensitivityPoint {
  double value = 0.0;
  double objective = 0.0;
  /// Cell attaining the minimum.
  std::size_t cell = 0;
};

/// For each value of `param` (grid order), the minimum objective over the
/// other two parameters.
std::vector<SensitivityPoint> sensitivity(const SweepResult& result, SweepParam param);

struct RuntimeConfig {
  Setting setting = Setting::on_policy;
  std::size_t n_steps = 500;
  std::size_t n_mdps = 5;
  std::size_t n_runs = 5;
  /// Timed repetitions per (mdp, run); the median is kept.
  std::size_t repeats = 11;
  std::uint64_t seed_root = 0;
  HyperParams hp{0.01, 1.0, 0.9, 0.5};
  EnvironmentParams env;
};

/// Microseconds for `n_steps` updates on 30-dimensional tabular features:
/// median over repeats, averaged over MDPs and runs. Trajectories are
/// generated before timing. Single-threaded.
double measure_runtime(const Algorithm& algorithm, const RuntimeConfig& config);

struct RealtimeLearner {
  const Algorithm* algorithm = nullptr;
  HyperParams hp;
};

/// Duration in milliseconds charged for one update.
using UpdateCost = std::function<double(const Algorithm&, std::size_t sample_index)>;

/**
 * Simulated real-time interaction. Iteration i spans [i c, (i+1) c). A free
 * learner takes the next sample of its trajectory and is busy for the
 * update's cost. Interaction pauses while it computes, so an update that
 * overruns the boundary consumes the following iterations. The metric of the
 * last completed update is recorded at the end of each iteration.
 */
struct RealtimeConfig {
  /// Milliseconds per iteration; may be +infinity.
  double c_ms = 1.0;
  std::size_t n_iterations = 100;
  /// 0 = no cap (requires finite c).
  std::size_t max_samples_per_iteration = 0;
  std::uint64_t seed = 0;
  MetricKind metric = MetricKind::mave;
  double clamp_ceiling = 1e6;
  /// Empty means wall-clock timing of each update.
  UpdateCost cost;
};

struct RealtimeResult {
  std::string algorithm;
  ErrorCurve curve;
  std::vector<std::size_t> samples_per_iteration;
  std::size_t total_samples = 0;
  std::vector<std::string> warnings;
};

/// Every learner sees the same trajectory (same seed).
std::vector<RealtimeResult> run_realtime(const ProblemInstance& problem,
                                         std::span<const RealtimeLearner> learners,
                                         const RealtimeConfig& config);

/// Smallest observable steady_clock increment in milliseconds.
double timer_granularity_ms();

}  // namespace tdlab
