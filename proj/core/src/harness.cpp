#include "tdlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include "tdlab/kernels.hpp"
#include "tdlab/serialization.hpp"
#include "trial.hpp"

namespace tdlab {

namespace {

constexpr std::uint64_t kEnvironmentTag = 0x656e76;  // "env"
constexpr std::size_t kMaxEnvironmentAttempts = 1000;

std::vector<double> powers_of_two(double scale, std::initializer_list<int> exponents) {
  std::vector<double> out;
  for (int j : exponents) out.push_back(scale * std::ldexp(1.0, j));
  return out;
}

/// Neumaier compensated sum over already sorted values.
double compensated_sum(std::span<const double> values) {
  double sum = 0.0, c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

auto param_key(const HyperParams& hp) { return std::make_tuple(hp.alpha, hp.eta, hp.lambda); }

bool better(const CellResult& a, const CellResult& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  return param_key(a.params) < param_key(b.params);
}

double representation_gamma(const RunConfig& config) {
  if (config.env.gamma > 0.0) return config.env.gamma;
  return config.representation == FeatureKind::binary ? 0.99 : 0.9;
}

std::string fingerprint(const Environment& env) {
  return fnv1a64_hex(environment_to_json(env.mdp, env.features, &env.policies));
}

struct CellOutput {
  CellResult result;
  std::vector<ErrorCurve> raw;
};

CellOutput run_cell(const RunConfig& config, const SweepGrid& grid,
                    const std::vector<ProblemInstance>& instances, const Algorithm& algorithm,
                    std::size_t k) {
  CellOutput out;
  out.result.index = k;
  out.result.params = grid.params(k, config.beta_scale);
  out.raw.reserve(instances.size() * config.n_runs);
  for (const auto& problem : instances) {
    for (std::size_t j = 0; j < config.n_runs; ++j) {
      auto curve = run_trial(problem, algorithm, out.result.params, config.n_steps,
                             trial_seed(config.seed_root, problem.index, j, k), config.metric,
                             config.clamp_ceiling);
      if (curve.diverged) ++out.result.diverged_runs;
      if (curve.diverged || curve.clamped_steps > 0) ++out.result.clamped_runs;
      out.raw.push_back(std::move(curve));
    }
  }
  out.result.curve = aggregate(out.raw);
  out.result.objective = last_half_mean(out.result.curve.mean);
  return out;
}

}  // namespace

std::string_view to_string(Setting setting) {
  switch (setting) {
    case Setting::on_policy: return "on-policy";
    case Setting::off_policy: return "off-policy";
    case Setting::baird: return "baird";
  }
  return "unknown";
}

Setting parse_setting(std::string_view name) {
  if (name == "on-policy") return Setting::on_policy;
  if (name == "off-policy") return Setting::off_policy;
  if (name == "baird") return Setting::baird;
  throw std::invalid_argument("unknown setting '" + std::string(name) +
                              "' (expected on-policy, off-policy or baird)");
}

std::vector<double> default_alphas() {
  return powers_of_two(0.1, {-8, -7, -6, -5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5, 6});
}

std::vector<double> default_etas() { return powers_of_two(1.0, {-4, -2, -1, 0, 1, 2, 4}); }

std::vector<double> default_lambdas() {
  return {0.0,  0.1,  0.2,  0.3,  0.4,  0.5,  0.6,  0.7,  0.8,  0.9,
          0.91, 0.92, 0.93, 0.94, 0.95, 0.96, 0.97, 0.98, 0.99, 1.0};
}

std::vector<double> baird_alphas() {
  return powers_of_two(0.1, {-10, -9, -8, -7, -6, -5, -4, -3, -2, -1, 0});
}

std::vector<double> baird_etas() {
  return powers_of_two(1.0, {-16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16, 32});
}

SweepGrid SweepGrid::baird() {
  SweepGrid g;
  g.alphas = baird_alphas();
  g.etas = baird_etas();
  return g;
}

SweepGrid::Coord SweepGrid::coord(std::size_t k) const {
  if (k >= size()) throw std::out_of_range("SweepGrid: cell index out of range");
  const std::size_t nl = lambdas.size();
  const std::size_t ne = etas.size();
  return {k / (ne * nl), (k / nl) % ne, k % nl};
}

std::size_t SweepGrid::cell(Coord c) const {
  return (c.alpha * etas.size() + c.eta) * lambdas.size() + c.lambda;
}

HyperParams SweepGrid::params(std::size_t k, double beta_scale) const {
  const auto c = coord(k);
  return {alphas[c.alpha], etas[c.eta], lambdas[c.lambda], beta_scale};
}

void validate(const SweepGrid& grid) {
  if (grid.alphas.empty() || grid.etas.empty() || grid.lambdas.empty()) {
    throw std::invalid_argument("grid: alphas, etas and lambdas must be non-empty");
  }
  for (double a : grid.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("grid: alpha must be > 0");
  }
  for (double e : grid.etas) {
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("grid: eta must be > 0");
  }
  for (double l : grid.lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("grid: lambda must lie in [0, 1]");
  }
}

void validate(const RunConfig& config) {
  const auto& algorithm = find_algorithm(config.algorithm);
  if (algorithm.on_policy_only && config.setting != Setting::on_policy) {
    throw std::invalid_argument("algorithm '" + config.algorithm +
                                "' is on-policy only and cannot run in setting " +
                                std::string(to_string(config.setting)));
  }
  if (config.setting == Setting::baird && config.metric == MetricKind::mave) {
    throw std::invalid_argument("metric mave is undefined on Baird's problem (use rmse or rmspbe)");
  }
  if (config.setting != Setting::baird && config.representation == FeatureKind::custom) {
    throw std::invalid_argument(
        "representation custom is only defined on Baird's problem (use tabular, "
        "aliased-tabular or binary)");
  }
  if (config.n_steps == 0 || config.n_runs == 0 || config.n_mdps == 0) {
    throw std::invalid_argument("n_steps, n_runs and n_mdps must be positive");
  }
  if (!(config.clamp_ceiling > 0.0)) throw std::invalid_argument("clamp_ceiling must be > 0");
  if (!(config.beta_scale >= 0.0 && config.beta_scale <= 1.0)) {
    throw std::invalid_argument("beta_scale must lie in [0, 1]");
  }
  const auto& env = config.env;
  if (env.n_states == 0 || env.n_actions == 0) {
    throw std::invalid_argument("environment: n_states and n_actions must be positive");
  }
  if (env.branching == 0 || env.branching > env.n_states) {
    throw std::invalid_argument("environment: branching must lie in [1, n_states]");
  }
  if (env.n_terminating > env.n_states * (env.n_states - 1)) {
    throw std::invalid_argument("environment: too many terminating transitions");
  }
  if (!(env.base_pi > 0.0 && env.base_pi <= 1.0) || !(env.base_mu > 0.0 && env.base_mu <= 1.0)) {
    throw std::invalid_argument("environment: base probabilities must lie in (0, 1]");
  }
  if (!(env.gamma >= 0.0 && env.gamma < 1.0)) {
    throw std::invalid_argument("environment: gamma must lie in [0, 1) (0 = default)");
  }
}

std::uint64_t trial_seed(std::uint64_t seed_root, std::size_t mdp, std::size_t run,
                         std::size_t cell) {
  return derive_seed({seed_root, mdp, run, cell});
}

ProblemInstance make_instance(const RunConfig& config, std::size_t mdp_index) {
  ProblemInstance out;
  out.index = mdp_index;
  if (config.setting == Setting::baird) {
    out.env = make_baird();
    const Eigen::VectorXd d = stationary_distribution(out.env.mdp, out.env.policies.mu);
    out.d_mu.assign(d.begin(), d.end());
    const Eigen::VectorXd v = true_values(out.env.mdp, out.env.policies.pi);
    out.v_star.assign(v.begin(), v.end());
    if (config.metric == MetricKind::rmspbe) {
      out.system = fixed_point_system(out.env.mdp, out.env.features, out.env.policies, 0.0);
    }
    out.fingerprint = fingerprint(out.env);
    return out;
  }

  const double gamma = representation_gamma(config);
  const auto& p = config.env;
  const double base_mu = config.setting == Setting::on_policy ? p.base_pi : p.base_mu;
  for (std::size_t attempt = 0; attempt < kMaxEnvironmentAttempts; ++attempt) {
    const auto seed = derive_seed({config.seed_root, kEnvironmentTag, mdp_index, attempt});
    try {
      Environment env;
      env.mdp = generate_random_mdp(p.n_states, p.n_actions, p.branching, p.n_terminating, seed,
                                    gamma);
      env.features = make_features(env.mdp, config.representation, derive_seed({seed, 1}));
      env.policies = make_policies(env.mdp, p.base_pi, base_mu, derive_seed({seed, 2}));
      env.initial_weights.assign(env.features.d, 0.0);

      const Eigen::VectorXd d = stationary_distribution(env.mdp, env.policies.mu);
      const Eigen::VectorXd v = true_values(env.mdp, env.policies.pi);
      std::vector<double> v_star(v.begin(), v.end());
      if (config.metric == MetricKind::mave) {
        for (double x : v_star) {
          if (!(std::abs(x) >= kMaveFloor)) throw DegenerateTarget("target below floor");
        }
      }
      if (config.metric == MetricKind::rmspbe) {
        out.system = fixed_point_system(env.mdp, env.features, env.policies, 0.0);
      }
      out.d_mu.assign(d.begin(), d.end());
      out.v_star = std::move(v_star);
      out.seed = seed;
      out.fingerprint = fingerprint(env);
      out.env = std::move(env);
      return out;
    } catch (const NotIrreducible&) {
    } catch (const SingularSystem&) {
    } catch (const DegenerateTarget&) {
    }
    out.rejected_seeds.push_back(seed);
  }
  throw std::runtime_error("make_instance: no usable environment after " +
                           std::to_string(kMaxEnvironmentAttempts) + " attempts");
}

std::vector<ProblemInstance> make_instances(const RunConfig& config) {
  std::vector<ProblemInstance> out;
  out.reserve(config.n_mdps);
  for (std::size_t i = 0; i < config.n_mdps; ++i) out.push_back(make_instance(config, i));
  return out;
}

ErrorCurve run_trial(const ProblemInstance& problem, const Algorithm& algorithm,
                     const HyperParams& hp, std::size_t n_steps, std::uint64_t seed,
                     MetricKind metric, double clamp_ceiling) {
  detail::TrialRunner runner(problem, algorithm, hp, seed, metric, clamp_ceiling);
  ErrorCurve curve;
  curve.kind = metric;
  curve.values.reserve(n_steps);
  for (std::size_t t = 0; t < n_steps; ++t) {
    runner.step();
    curve.values.push_back(runner.error());
  }
  curve.diverged = runner.diverged();
  curve.clamped_steps = runner.clamped_steps();
  return curve;
}

AggregateCurve aggregate(std::span<const std::vector<double>> curves) {
  AggregateCurve out;
  out.n = curves.size();
  if (curves.empty()) return out;
  const std::size_t steps = curves.front().size();
  for (const auto& c : curves) {
    if (c.size() != steps) throw std::invalid_argument("aggregate: curves differ in length");
  }
  out.mean.resize(steps);
  out.stderr_.resize(steps);
  std::vector<double> column(curves.size());
  std::vector<double> sq(curves.size());
  const double n = static_cast<double>(curves.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < curves.size(); ++i) column[i] = curves[i][t];
    std::sort(column.begin(), column.end());
    const double mean = compensated_sum(column) / n;
    out.mean[t] = mean;
    if (curves.size() < 2) {
      out.stderr_[t] = 0.0;
      continue;
    }
    for (std::size_t i = 0; i < column.size(); ++i) sq[i] = (column[i] - mean) * (column[i] - mean);
    std::sort(sq.begin(), sq.end());
    const double var = compensated_sum(sq) / (n - 1.0);
    out.stderr_[t] = std::sqrt(var / n);
  }
  return out;
}

AggregateCurve aggregate(std::span<const ErrorCurve> curves) {
  std::vector<std::vector<double>> values;
  values.reserve(curves.size());
  for (const auto& c : curves) values.push_back(c.values);
  return aggregate(std::span<const std::vector<double>>(values));
}

double last_half_mean(std::span<const double> curve) {
  if (curve.empty()) return 0.0;
  const std::size_t start = curve.size() / 2;
  double sum = 0.0;
  for (std::size_t t = start; t < curve.size(); ++t) sum += curve[t];
  return sum / static_cast<double>(curve.size() - start);
}

std::size_t SweepResult::diverged_runs() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.diverged_runs;
  return n;
}

std::size_t SweepResult::clamped_runs() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.clamped_runs;
  return n;
}

std::size_t select_best(std::span<const CellResult> cells) {
  if (cells.empty()) throw std::invalid_argument("select_best: no cells");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (better(cells[i], cells[best])) best = i;
  }
  return best;
}

SweepResult run_sweep(const RunConfig& config, const SweepGrid& grid, const SweepOptions& options) {
  validate(config);
  validate(grid);
  return run_sweep(config, grid, make_instances(config), options);
}

SweepResult run_sweep(const RunConfig& config, const SweepGrid& grid,
                      std::vector<ProblemInstance> instances, const SweepOptions& options) {
  validate(config);
  validate(grid);
  if (instances.size() != config.n_mdps) {
    throw std::invalid_argument("run_sweep: instance count does not match n_mdps");
  }
  const auto& algorithm = find_algorithm(config.algorithm);

  SweepResult result;
  result.config = config;
  result.grid = grid;
  result.instances = std::move(instances);
  const std::size_t n_cells = grid.size();
  result.cells.reserve(n_cells);

  auto consume = [&](CellOutput&& out) {
    if (options.on_cell) options.on_cell(out.result, out.raw);
    result.cells.push_back(std::move(out.result));
  };

  std::size_t jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                       : options.jobs;
  jobs = std::min(jobs, n_cells);

  if (jobs <= 1) {
    for (std::size_t k = 0; k < n_cells; ++k) {
      consume(run_cell(config, grid, result.instances, algorithm, k));
    }
  } else {
    std::mutex mutex;
    std::condition_variable ready;
    std::vector<std::optional<CellOutput>> slots(n_cells);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;

    auto worker = [&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= n_cells) return;
        {
          std::lock_guard lock(mutex);
          if (error) return;
        }
        try {
          auto out = run_cell(config, grid, result.instances, algorithm, k);
          std::lock_guard lock(mutex);
          slots[k] = std::move(out);
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!error) error = std::current_exception();
        }
        ready.notify_all();
      }
    };

    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);

    for (std::size_t k = 0; k < n_cells; ++k) {
      std::optional<CellOutput> out;
      {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return slots[k].has_value() || error; });
        if (error) break;
        out = std::move(slots[k]);
        slots[k].reset();
      }
      consume(std::move(*out));
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
  }

  result.best_cell = select_best(result.cells);
  return result;
}

std::string_view to_string(SweepParam param) {
  switch (param) {
    case SweepParam::alpha: return "alpha";
    case SweepParam::eta: return "eta";
    case SweepParam::lambda: return "lambda";
  }
  return "unknown";
}

std::vector<SensitivityPoint> sensitivity(const SweepResult& result, SweepParam param) {
  const auto& grid = result.grid;
  if (result.cells.size() != grid.size()) {
    throw std::invalid_argument("sensitivity: result does not cover the grid");
  }
  const std::vector<double>& values = param == SweepParam::alpha ? grid.alphas
                                      : param == SweepParam::eta ? grid.etas
                                                                 : grid.lambdas;
  auto pick = [param](const SweepGrid::Coord& c) {
    return param == SweepParam::alpha ? c.alpha : param == SweepParam::eta ? c.eta : c.lambda;
  };

  std::vector<SensitivityPoint> out;
  out.reserve(values.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    const CellResult* best = nullptr;
    for (const auto& cell : result.cells) {
      if (pick(grid.coord(cell.index)) != v) continue;
      if (best == nullptr || better(cell, *best)) best = &cell;
    }
    out.push_back({values[v], best->objective, best->index});
  }
  return out;
}

double measure_runtime(const Algorithm& algorithm, const RuntimeConfig& config) {
  if (config.setting == Setting::baird) {
    throw std::invalid_argument("measure_runtime: runtime protocol uses random MDPs");
  }
  if (algorithm.on_policy_only && config.setting != Setting::on_policy) {
    throw std::invalid_argument("measure_runtime: algorithm is on-policy only");
  }
  if (config.n_steps == 0 || config.repeats == 0 || config.n_mdps == 0 || config.n_runs == 0) {
    throw std::invalid_argument("measure_runtime: counts must be positive");
  }
  RunConfig rc;
  rc.algorithm = std::string(algorithm.name);
  rc.setting = config.setting;
  rc.representation = FeatureKind::tabular;
  rc.metric = MetricKind::rmse;
  rc.seed_root = config.seed_root;
  rc.env = config.env;

  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;
  double total_us = 0.0;
  std::vector<double> timings(config.repeats);
  std::vector<TransitionSample> trajectory(config.n_steps);

  for (std::size_t i = 0; i < config.n_mdps; ++i) {
    const auto problem = make_instance(rc, i);
    const auto& env = problem.env;
    for (std::size_t j = 0; j < config.n_runs; ++j) {
      Rng rng(trial_seed(config.seed_root, i, j, 0));
      std::size_t s = rng.uniform_index(env.mdp.n_states);
      for (auto& sample : trajectory) {
        sample = sample_step(env.mdp, env.policies, s, rng);
        s = sample.s_next;
      }
      for (std::size_t r = 0; r < config.repeats; ++r) {
        auto state = make_learner_state(env.initial_weights);
        const auto start = clock::now();
        for (const auto& sample : trajectory) {
          algorithm.update(state, sample, env.features(sample.s), env.features(sample.s_next),
                           config.hp);
        }
        const auto stop = clock::now();
        sink = sink + state.w[0];
        timings[r] = std::chrono::duration<double, std::micro>(stop - start).count();
      }
      auto mid = timings.begin() + static_cast<long>(timings.size() / 2);
      std::nth_element(timings.begin(), mid, timings.end());
      total_us += *mid;
    }
  }
  return total_us / static_cast<double>(config.n_mdps * config.n_runs);
}

}  // namespace tdlab
