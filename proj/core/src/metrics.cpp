#include "tdlab/metrics.hpp"

#include <cmath>
#include <string>

#include "tdlab/kernels.hpp"

namespace tdlab {

namespace {

void check_shapes(std::span<const double> w, const FeatureMap& features,
                  std::span<const double> v_star, std::span<const double> d_mu) {
  if (w.size() != features.d) throw DimensionMismatch("metric: weight dimension mismatch");
  if (v_star.size() != features.n_states || d_mu.size() != features.n_states) {
    throw DimensionMismatch("metric: state count mismatch");
  }
}

void check_targets(std::span<const double> v_star) {
  for (std::size_t s = 0; s < v_star.size(); ++s) {
    if (!(std::abs(v_star[s]) >= kMaveFloor)) {
      throw DegenerateTarget("mave: |V*(" + std::to_string(s) + ")| is below the floor");
    }
  }
}

double mave_unchecked(std::span<const double> w, const FeatureMap& features,
                      std::span<const double> v_star, std::span<const double> d_mu) {
  double acc = 0.0;
  for (std::size_t s = 0; s < features.n_states; ++s) {
    const double v = kernels::dot(features(s), w);
    acc += d_mu[s] * std::abs(v - v_star[s]) / std::abs(v_star[s]);
  }
  return acc;
}

double rmse_unchecked(std::span<const double> w, const FeatureMap& features,
                      std::span<const double> v_star, std::span<const double> d_mu) {
  double acc = 0.0;
  for (std::size_t s = 0; s < features.n_states; ++s) {
    const double err = kernels::dot(features(s), w) - v_star[s];
    acc += d_mu[s] * err * err;
  }
  return std::sqrt(acc);
}

}  // namespace

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::mave: return "mave";
    case MetricKind::rmse: return "rmse";
    case MetricKind::rmspbe: return "rmspbe";
  }
  return "unknown";
}

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "mave") return MetricKind::mave;
  if (name == "rmse") return MetricKind::rmse;
  if (name == "rmspbe") return MetricKind::rmspbe;
  throw std::invalid_argument("unknown metric '" + std::string(name) +
                              "' (expected mave, rmse or rmspbe)");
}

double mave(std::span<const double> w, const FeatureMap& features, std::span<const double> v_star,
            std::span<const double> d_mu) {
  check_shapes(w, features, v_star, d_mu);
  check_targets(v_star);
  return mave_unchecked(w, features, v_star, d_mu);
}

double rmse(std::span<const double> w, const FeatureMap& features, std::span<const double> v_star,
            std::span<const double> d_mu) {
  check_shapes(w, features, v_star, d_mu);
  return rmse_unchecked(w, features, v_star, d_mu);
}

double rmspbe(std::span<const double> w, const FixedPointSystem& sys) {
  return std::sqrt(mspbe(w, sys));
}

MetricEvaluator::MetricEvaluator(MetricKind kind, const FeatureMap& features,
                                 std::vector<double> v_star, std::vector<double> d_mu)
    : kind_(kind), features_(&features), v_star_(std::move(v_star)), d_mu_(std::move(d_mu)) {
  if (kind == MetricKind::rmspbe) {
    throw std::invalid_argument("MetricEvaluator: rmspbe needs a FixedPointSystem");
  }
  if (v_star_.size() != features.n_states || d_mu_.size() != features.n_states) {
    throw DimensionMismatch("MetricEvaluator: state count mismatch");
  }
  if (kind == MetricKind::mave) check_targets(v_star_);
}

MetricEvaluator::MetricEvaluator(const FixedPointSystem& sys)
    : kind_(MetricKind::rmspbe),
      sys_(&sys),
      residual_(sys.b.size()),
      scratch_(sys.b.size()) {}

double MetricEvaluator::operator()(std::span<const double> w) const {
  switch (kind_) {
    case MetricKind::mave:
      if (w.size() != features_->d) throw DimensionMismatch("metric: weight dimension mismatch");
      return mave_unchecked(w, *features_, v_star_, d_mu_);
    case MetricKind::rmse:
      if (w.size() != features_->d) throw DimensionMismatch("metric: weight dimension mismatch");
      return rmse_unchecked(w, *features_, v_star_, d_mu_);
    case MetricKind::rmspbe: {
      if (static_cast<Eigen::Index>(w.size()) != residual_.size()) {
        throw DimensionMismatch("metric: weight dimension mismatch");
      }
      const Eigen::Map<const Eigen::VectorXd> wv(w.data(), residual_.size());
      residual_ = sys_->b;
      residual_.noalias() -= sys_->A * wv;
      scratch_.noalias() = sys_->C_inverse * residual_;
      return std::sqrt(std::max(0.0, residual_.dot(scratch_)));
    }
  }
  return 0.0;
}

}  // namespace tdlab
