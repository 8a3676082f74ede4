#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "tdlab/harness.hpp"

namespace {

using namespace tdlab;

RunConfig small_config(std::string algorithm, Setting setting = Setting::on_policy) {
  RunConfig c;
  c.algorithm = std::move(algorithm);
  c.setting = setting;
  c.n_steps = 200;
  c.n_runs = 3;
  c.n_mdps = 2;
  c.seed_root = 17;
  c.env.n_states = 10;
  return c;
}

TEST(Grid, DefaultCardinalities) {
  const SweepGrid g;
  EXPECT_EQ(g.alphas.size(), 15u);
  EXPECT_EQ(g.etas.size(), 7u);
  EXPECT_EQ(g.lambdas.size(), 20u);
  EXPECT_EQ(g.size(), 2100u);
  EXPECT_DOUBLE_EQ(g.alphas.front(), 0.1 / 256.0);
  EXPECT_DOUBLE_EQ(g.alphas.back(), 6.4);
  EXPECT_EQ(g.lambdas[9], 0.9);
  EXPECT_EQ(g.lambdas[10], 0.91);
  EXPECT_EQ(g.lambdas.back(), 1.0);
  const auto b = SweepGrid::baird();
  EXPECT_EQ(b.alphas.size(), 11u);
  EXPECT_EQ(b.etas.size(), 12u);
  EXPECT_DOUBLE_EQ(b.etas.front(), std::ldexp(1.0, -16));
  EXPECT_DOUBLE_EQ(b.etas.back(), std::ldexp(1.0, 32));
  EXPECT_NO_THROW(validate(g));
  EXPECT_NO_THROW(validate(b));
}

TEST(Grid, CellNumberingLambdaFastest) {
  SweepGrid g{{0.1, 0.2}, {1.0, 2.0, 4.0}, {0.0, 0.5}};
  EXPECT_EQ(g.size(), 12u);
  const auto c = g.coord(7);
  EXPECT_EQ(c.alpha, 1u);
  EXPECT_EQ(c.eta, 0u);
  EXPECT_EQ(c.lambda, 1u);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(g.cell(g.coord(k)), k);
  const auto hp = g.params(7, 0.3);
  EXPECT_EQ(hp.alpha, 0.2);
  EXPECT_EQ(hp.eta, 1.0);
  EXPECT_EQ(hp.lambda, 0.5);
  EXPECT_EQ(hp.beta_scale, 0.3);
  EXPECT_THROW(g.coord(12), std::out_of_range);
}

TEST(Grid, ValidationRejectsBadValues) {
  EXPECT_THROW(validate(SweepGrid{{}, {1.0}, {0.0}}), std::invalid_argument);
  EXPECT_THROW(validate(SweepGrid{{-0.1}, {1.0}, {0.0}}), std::invalid_argument);
  EXPECT_THROW(validate(SweepGrid{{0.1}, {0.0}, {0.0}}), std::invalid_argument);
  EXPECT_THROW(validate(SweepGrid{{0.1}, {1.0}, {1.1}}), std::invalid_argument);
}

TEST(RunConfigValidation, RejectsInconsistentSettings) {
  EXPECT_NO_THROW(validate(small_config("td")));
  EXPECT_THROW(validate(small_config("td", Setting::off_policy)), std::invalid_argument);
  EXPECT_THROW(validate(small_config("nosuch")), std::invalid_argument);
  auto c = small_config("gtd", Setting::baird);
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.metric = MetricKind::rmse;
  EXPECT_NO_THROW(validate(c));
  c.n_runs = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Settings, NamesRoundTrip) {
  for (auto s : {Setting::on_policy, Setting::off_policy, Setting::baird}) {
    EXPECT_EQ(parse_setting(to_string(s)), s);
  }
  EXPECT_THROW(parse_setting("offpolicy"), std::invalid_argument);
}

TEST(Aggregate, IdenticalCurvesHaveZeroStandardError) {
  const std::vector<std::vector<double>> curves(5, std::vector<double>{1.0, 2.0, 3.0});
  const auto a = aggregate(std::span<const std::vector<double>>(curves));
  EXPECT_EQ(a.n, 5u);
  EXPECT_EQ(a.mean, (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(a.stderr_, (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Aggregate, TwoCurvesHandComputed) {
  const std::vector<std::vector<double>> curves{{0.0}, {2.0}};
  const auto a = aggregate(std::span<const std::vector<double>>(curves));
  EXPECT_DOUBLE_EQ(a.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(a.stderr_[0], 1.0);
}

TEST(Aggregate, SingleCurveHasZeroStandardError) {
  const std::vector<std::vector<double>> curves{{4.0, 5.0}};
  const auto a = aggregate(std::span<const std::vector<double>>(curves));
  EXPECT_EQ(a.stderr_, (std::vector<double>{0.0, 0.0}));
}

TEST(Aggregate, OrderIndependentBitForBit) {
  Rng rng(3);
  std::vector<std::vector<double>> curves(257, std::vector<double>(20));
  for (auto& c : curves) {
    for (auto& v : c) v = std::exp(20.0 * rng.uniform() - 10.0);
  }
  const auto a = aggregate(std::span<const std::vector<double>>(curves));
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(curves.begin(), curves.end(), rng.engine());
    const auto b = aggregate(std::span<const std::vector<double>>(curves));
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stderr_, b.stderr_);
  }
}

TEST(Aggregate, RejectsRaggedCurves) {
  const std::vector<std::vector<double>> curves{{1.0}, {1.0, 2.0}};
  EXPECT_THROW(aggregate(std::span<const std::vector<double>>(curves)), std::invalid_argument);
}

TEST(Objective, LastHalfMean) {
  EXPECT_DOUBLE_EQ(last_half_mean(std::vector<double>{9.0, 9.0, 1.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(last_half_mean(std::vector<double>{9.0, 1.0, 2.0}), 1.5);
  EXPECT_DOUBLE_EQ(last_half_mean(std::vector<double>{4.0}), 4.0);
}

/// SweepResult with planted objectives over a 2 x 2 x 2 grid.
SweepResult planted(const std::vector<double>& objectives) {
  SweepResult r;
  r.grid = SweepGrid{{0.1, 0.2}, {1.0, 2.0}, {0.0, 0.5}};
  for (std::size_t k = 0; k < r.grid.size(); ++k) {
    CellResult c;
    c.index = k;
    c.params = r.grid.params(k, 0.5);
    c.objective = objectives[k];
    r.cells.push_back(c);
  }
  r.best_cell = select_best(r.cells);
  return r;
}

TEST(Selection, PlantedGridBestAndSensitivity) {
  // cells: (a, e, l) in lambda-fastest order
  const std::vector<double> obj{5.0, 4.0, 3.0, 6.0, 2.5, 7.0, 8.0, 1.0};
  const auto r = planted(obj);
  EXPECT_EQ(r.best_cell, 7u);

  const auto sa = sensitivity(r, SweepParam::alpha);
  ASSERT_EQ(sa.size(), 2u);
  EXPECT_EQ(sa[0].objective, 3.0);  // min(5, 4, 3, 6)
  EXPECT_EQ(sa[0].cell, 2u);
  EXPECT_EQ(sa[1].objective, 1.0);  // min(2.5, 7, 8, 1)

  const auto se = sensitivity(r, SweepParam::eta);
  EXPECT_EQ(se[0].objective, 2.5);  // cells 0, 1, 4, 5
  EXPECT_EQ(se[1].objective, 1.0);  // cells 2, 3, 6, 7

  const auto sl = sensitivity(r, SweepParam::lambda);
  EXPECT_EQ(sl[0].objective, 2.5);  // cells 0, 2, 4, 6
  EXPECT_EQ(sl[1].objective, 1.0);  // cells 1, 3, 5, 7
  EXPECT_EQ(sl[0].value, 0.0);
  EXPECT_EQ(sl[1].value, 0.5);
}

TEST(Selection, TiesGoToSmallestParameters) {
  const auto r = planted(std::vector<double>(8, 1.0));
  EXPECT_EQ(r.best_cell, 0u);
  std::vector<double> obj(8, 2.0);
  obj[6] = obj[3] = 1.0;  // (0.2, 2, 0) and (0.1, 2, 0.5)
  EXPECT_EQ(planted(obj).best_cell, 3u);
}

TEST(Selection, DominatedValueIsStrictlyWorse) {
  std::vector<double> obj{1.0, 1.1, 1.2, 1.3, 5.0, 6.0, 7.0, 8.0};
  const auto sa = sensitivity(planted(obj), SweepParam::alpha);
  EXPECT_GT(sa[1].objective, sa[0].objective);
}

TEST(Instances, DeterministicAndUsable) {
  auto c = small_config("htd", Setting::off_policy);
  c.env.n_states = 30;
  const auto a = make_instance(c, 3);
  const auto b = make_instance(c, 3);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.rejected_seeds, b.rejected_seeds);
  EXPECT_EQ(a.fingerprint, b.fingerprint);
  EXPECT_EQ(a.env.mdp, b.env.mdp);
  EXPECT_EQ(a.v_star, b.v_star);
  for (double v : a.v_star) EXPECT_GE(std::abs(v), kMaveFloor);
  EXPECT_NE(make_instance(c, 4).fingerprint, a.fingerprint);
  EXPECT_EQ(a.env.mdp.default_gamma, 0.9);
  c.representation = FeatureKind::binary;
  EXPECT_EQ(make_instance(c, 0).env.mdp.default_gamma, 0.99);
}

TEST(Instances, RejectedSeedsAreRecorded) {
  // Two successors and one action make reducible chains common.
  auto c = small_config("gtd", Setting::off_policy);
  c.env.n_states = 12;
  c.env.n_actions = 1;
  c.env.branching = 2;
  c.env.n_terminating = 0;
  c.n_mdps = 10;
  std::size_t rejected = 0;
  for (const auto& p : make_instances(c)) {
    rejected += p.rejected_seeds.size();
    EXPECT_NO_THROW(stationary_distribution(p.env.mdp, p.env.policies.mu));
  }
  EXPECT_GT(rejected, 0u);
}

TEST(Instances, BairdCarriesFixedPointForRmspbe) {
  auto c = small_config("gtd", Setting::baird);
  c.metric = MetricKind::rmspbe;
  const auto p = make_instance(c, 0);
  ASSERT_TRUE(p.system.has_value());
  EXPECT_EQ(p.env.initial_weights.size(), 8u);
  for (double d : p.d_mu) EXPECT_NEAR(d, 1.0 / 7.0, 1e-12);
}

TEST(RunTrial, BitwiseReproducible) {
  const auto c = small_config("toetd-beta", Setting::off_policy);
  const auto p = make_instance(c, 0);
  const auto& alg = find_algorithm("toetd-beta");
  const HyperParams hp{0.05, 1.0, 0.9, 0.5};
  const auto a = run_trial(p, alg, hp, 300, 99, MetricKind::mave);
  const auto b = run_trial(p, alg, hp, 300, 99, MetricKind::mave);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values.size(), 300u);
  EXPECT_NE(run_trial(p, alg, hp, 300, 100, MetricKind::mave).values, a.values);
}

TEST(RunTrial, ZeroRewardCurveIsFlat) {
  auto p = make_instance(small_config("gtd", Setting::off_policy), 0);
  std::fill(p.env.mdp.R.begin(), p.env.mdp.R.end(), 0.0);
  std::fill(p.v_star.begin(), p.v_star.end(), 0.0);
  for (const auto& alg : algorithms()) {
    if (alg.on_policy_only) continue;
    const auto curve = run_trial(p, alg, {0.1, 1.0, 0.5, 0.5}, 100, 5, MetricKind::rmse);
    for (double v : curve.values) ASSERT_EQ(v, 0.0) << alg.name;
  }
}

TEST(RunTrial, TdLearnsOnPolicy) {
  const auto c = small_config("td");
  const auto p = make_instance(c, 0);
  std::vector<ErrorCurve> curves;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    curves.push_back(run_trial(p, find_algorithm("td"), {0.05, 1.0, 0.5, 0.5}, 2000, seed,
                               MetricKind::mave));
  }
  const auto agg = aggregate(curves);
  auto window = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t t = from; t < to; ++t) s += agg.mean[t];
    return s / static_cast<double>(to - from);
  };
  EXPECT_GT(window(0, 200), window(1000, 1200));
  EXPECT_GT(window(1000, 1200), window(1800, 2000));
  EXPECT_LT(window(1800, 2000), 0.5);
}

TEST(RunTrial, DivergenceIsClampedAndFlagged) {
  RunConfig c = small_config("td0", Setting::baird);
  c.metric = MetricKind::rmse;
  const auto p = make_instance(c, 0);
  const auto curve = run_trial(p, find_algorithm("td0"), {0.5, 1.0, 0.0, 0.5}, 20000, 3,
                               MetricKind::rmse, 1e6);
  EXPECT_TRUE(curve.diverged || curve.clamped_steps > 0);
  for (double v : curve.values) {
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_LE(v, 1e6);
  }
  EXPECT_EQ(curve.values.back(), 1e6);
}

TEST(RunSweep, SingleCellGridSelectsThatCell) {
  const auto r = run_sweep(small_config("td"), SweepGrid{{0.05}, {1.0}, {0.5}});
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.best_cell, 0u);
  EXPECT_EQ(r.best().curve.n, 6u);
  EXPECT_EQ(r.instances.size(), 2u);
}

TEST(RunSweep, DominantCellSelected) {
  auto c = small_config("td");
  c.n_steps = 1000;
  const auto r = run_sweep(c, SweepGrid{{1e-5, 0.05}, {1.0}, {0.5}});
  EXPECT_EQ(r.best_cell, 1u);
  EXPECT_LT(r.cells[1].objective, r.cells[0].objective);
}

TEST(RunSweep, ParallelMatchesSerialAndStreamsInOrder) {
  auto c = small_config("htd", Setting::off_policy);
  const SweepGrid g{{0.01, 0.1}, {0.5, 2.0}, {0.0, 0.9}};
  std::vector<std::size_t> order_serial, order_parallel;
  SweepOptions serial;
  serial.on_cell = [&](const CellResult& cell, std::span<const ErrorCurve> raw) {
    order_serial.push_back(cell.index);
    EXPECT_EQ(raw.size(), c.n_mdps * c.n_runs);
  };
  SweepOptions parallel;
  parallel.jobs = 3;
  parallel.on_cell = [&](const CellResult& cell, std::span<const ErrorCurve>) {
    order_parallel.push_back(cell.index);
  };
  const auto a = run_sweep(c, g, serial);
  const auto b = run_sweep(c, g, parallel);
  EXPECT_EQ(order_serial, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(order_parallel, order_serial);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].curve.mean, b.cells[k].curve.mean);
    EXPECT_EQ(a.cells[k].curve.stderr_, b.cells[k].curve.stderr_);
    EXPECT_EQ(a.cells[k].objective, b.cells[k].objective);
    EXPECT_LE(a.best().objective, a.cells[k].objective);
  }
  EXPECT_EQ(a.best_cell, b.best_cell);
}

TEST(RunSweep, WorkerErrorsPropagate) {
  auto c = small_config("gtd", Setting::off_policy);
  const SweepGrid g{{0.01, 0.1}, {1.0}, {0.0}};
  SweepOptions opt;
  opt.jobs = 2;
  opt.on_cell = [](const CellResult& cell, std::span<const ErrorCurve>) {
    if (cell.index == 1) throw std::runtime_error("sink failed");
  };
  EXPECT_THROW(run_sweep(c, g, opt), std::runtime_error);
}

TEST(MeasureRuntime, PositiveAndRejectsInvalidSetups) {
  RuntimeConfig rc;
  rc.n_mdps = 1;
  rc.n_runs = 1;
  rc.repeats = 3;
  EXPECT_GT(measure_runtime(find_algorithm("td0"), rc), 0.0);
  rc.setting = Setting::off_policy;
  EXPECT_THROW(measure_runtime(find_algorithm("totd"), rc), std::invalid_argument);
  rc.setting = Setting::baird;
  EXPECT_THROW(measure_runtime(find_algorithm("td0"), rc), std::invalid_argument);
}

}  // namespace
