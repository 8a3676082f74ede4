#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "tdlab/metrics.hpp"

namespace {

using namespace tdlab;

FeatureMap identity_features(std::size_t n) {
  FeatureMap f;
  f.n_states = n;
  f.d = n;
  f.x.assign(n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) f.x[s * n + s] = 1.0;
  return f;
}

TEST(Mave, ZeroWeightsGiveOne) {
  const auto f = identity_features(4);
  const std::vector<double> v{1.5, -2.0, 0.3, 7.0}, d{0.1, 0.2, 0.3, 0.4}, w(4, 0.0);
  EXPECT_NEAR(mave(w, f, v, d), 1.0, 1e-15);
}

TEST(Mave, PerfectPredictionGivesZero) {
  const auto f = identity_features(3);
  const std::vector<double> v{1.0, 2.0, 4.0}, d{0.5, 0.25, 0.25};
  EXPECT_EQ(mave(v, f, v, d), 0.0);
}

TEST(Mave, HandComputedToy) {
  const auto f = identity_features(3);
  const std::vector<double> v{1.0, 2.0, 4.0}, d{0.5, 0.25, 0.25}, w{0.0, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(mave(w, f, v, d), 0.625);
}

TEST(Mave, DegenerateTargetRejected) {
  const auto f = identity_features(2);
  const std::vector<double> v{1.0, 1e-9}, d{0.5, 0.5}, w(2, 0.0);
  EXPECT_THROW(mave(w, f, v, d), DegenerateTarget);
  EXPECT_THROW(MetricEvaluator(MetricKind::mave, f, v, d), DegenerateTarget);
  EXPECT_NO_THROW(MetricEvaluator(MetricKind::rmse, f, v, d));
}

TEST(Rmse, HandComputed) {
  const auto f = identity_features(2);
  const std::vector<double> v{0.0, 0.0}, d{0.5, 0.5}, w{3.0, 4.0};
  EXPECT_DOUBLE_EQ(rmse(w, f, v, d), std::sqrt(12.5));
  EXPECT_EQ(rmse(v, f, v, d), 0.0);
}

TEST(Rmse, SquareEqualsWeightedSecondMoment) {
  Rng rng(5);
  FeatureMap f;
  f.n_states = 9;
  f.d = 4;
  f.x.resize(36);
  for (auto& v : f.x) v = rng.uniform() - 0.5;
  std::vector<double> v(9), d(9), w(4);
  for (auto& x : v) x = rng.uniform() * 3.0;
  for (auto& x : d) x = rng.uniform();
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  for (auto& x : d) x /= total;
  for (auto& x : w) x = rng.uniform();
  double naive = 0.0;
  for (std::size_t s = 0; s < 9; ++s) {
    double pred = 0.0;
    for (std::size_t i = 0; i < 4; ++i) pred += f.x[s * 4 + i] * w[i];
    naive += d[s] * (pred - v[s]) * (pred - v[s]);
  }
  const double r = rmse(w, f, v, d);
  EXPECT_NEAR(r * r, naive, 1e-12);
}

TEST(Metrics, PermutationInvariant) {
  const auto f = identity_features(4);
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0}, d{0.1, 0.2, 0.3, 0.4}, w{0.5, 2.5, 1.0, 4.0};
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<double> vp(4), dp(4), wp(4);
  for (std::size_t i = 0; i < 4; ++i) {
    vp[i] = v[perm[i]];
    dp[i] = d[perm[i]];
    wp[i] = w[perm[i]];
  }
  EXPECT_NEAR(mave(w, f, v, d), mave(wp, f, vp, dp), 1e-15);
  EXPECT_NEAR(rmse(w, f, v, d), rmse(wp, f, vp, dp), 1e-15);
}

TEST(Rmspbe, IsRootOfMspbe) {
  const auto mdp = generate_random_mdp(10, 3, 4, 2, 12);
  const auto pp = make_policies(mdp, 0.9, 0.8, 12);
  const auto f = make_features(mdp, FeatureKind::binary, 12);
  const auto sys = fixed_point_system(mdp, f, pp, 0.0);
  const std::vector<double> zero(f.d, 0.0);
  EXPECT_NEAR(rmspbe(zero, sys), std::sqrt(sys.b.dot(sys.C_inverse * sys.b)), 1e-14);
  const Eigen::VectorXd star = td_fixed_point(sys);
  EXPECT_LT(rmspbe(std::vector<double>(star.begin(), star.end()), sys), 1e-5);
  const std::vector<double> w{0.3, -0.4, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(rmspbe(w, sys), std::sqrt(mspbe(w, sys)));
  const MetricEvaluator eval(sys);
  EXPECT_DOUBLE_EQ(eval(w), rmspbe(w, sys));
}

TEST(MetricEvaluator, MatchesFreeFunctions) {
  const auto f = identity_features(3);
  const std::vector<double> v{1.0, 2.0, 4.0}, d{0.5, 0.25, 0.25}, w{0.0, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(MetricEvaluator(MetricKind::mave, f, v, d)(w), mave(w, f, v, d));
  EXPECT_DOUBLE_EQ(MetricEvaluator(MetricKind::rmse, f, v, d)(w), rmse(w, f, v, d));
  EXPECT_THROW(MetricEvaluator(MetricKind::rmse, f, v, d)(std::vector<double>(2)),
               DimensionMismatch);
}

TEST(MetricKind, NamesRoundTrip) {
  for (auto k : {MetricKind::mave, MetricKind::rmse, MetricKind::rmspbe}) {
    EXPECT_EQ(parse_metric_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_metric_kind("mse"), std::invalid_argument);
}

}  // namespace
