#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tdlab/mdp.hpp"
#include "tdlab/oracle.hpp"

namespace tdlab {

enum class MetricKind { mave, rmse, rmspbe };

std::string_view to_string(MetricKind kind);
/// Accepts "mave", "rmse", "rmspbe".
MetricKind parse_metric_kind(std::string_view name);

/// Relative error is undefined for some |V*(s)| below kMaveFloor.
class DegenerateTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaveFloor = 1e-6;

/// Per-step error of one learner run. `diverged` is set once any weight
/// became non-finite; later values hold the clamp ceiling.
struct ErrorCurve {
  MetricKind kind = MetricKind::mave;
  std::vector<double> values;
  bool diverged = false;
  std::size_t clamped_steps = 0;

  std::size_t steps() const { return values.size(); }
};

/// sum_s d(s) |x(s)^T w - V*(s)| / |V*(s)|. Throws DegenerateTarget.
double mave(std::span<const double> w, const FeatureMap& features, std::span<const double> v_star,
            std::span<const double> d_mu);

/// sqrt(sum_s d(s) (x(s)^T w - V*(s))^2).
double rmse(std::span<const double> w, const FeatureMap& features, std::span<const double> v_star,
            std::span<const double> d_mu);

/// sqrt(mspbe(w, sys)).
double rmspbe(std::span<const double> w, const FixedPointSystem& sys);

/**
 * Evaluates one metric repeatedly for a fixed problem without allocating per
 * call. Holds scratch buffers, so one instance per thread.
 */
class MetricEvaluator {
 public:
  /// mave or rmse. Throws DegenerateTarget at construction for mave when a
  /// target is below the floor.
  MetricEvaluator(MetricKind kind, const FeatureMap& features, std::vector<double> v_star,
                  std::vector<double> d_mu);
  /// rmspbe.
  explicit MetricEvaluator(const FixedPointSystem& sys);

  MetricKind kind() const { return kind_; }
  double operator()(std::span<const double> w) const;

 private:
  MetricKind kind_;
  const FeatureMap* features_ = nullptr;
  std::vector<double> v_star_;
  std::vector<double> d_mu_;
  const FixedPointSystem* sys_ = nullptr;
  mutable Eigen::VectorXd residual_;
  mutable Eigen::VectorXd scratch_;
};

}  // namespace tdlab
