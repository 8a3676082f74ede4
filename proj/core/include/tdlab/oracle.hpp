#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tdlab/learners.hpp"
#include "tdlab/mdp.hpp"

namespace tdlab {

/// A linear system the caller expected to be solvable was numerically singular.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The behavior chain has no unique stationary distribution.
class NotIrreducible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// P_pi(s, s') = sum_a pi(s, a) P(s, a, s'). `policy` is row-major n x m.
Eigen::MatrixXd policy_transition_matrix(const MdpSpec& mdp, std::span<const double> policy);

/// P_pi with every entry multiplied by the transition discount gamma(s, s').
Eigen::MatrixXd discounted_transition_matrix(const MdpSpec& mdp, std::span<const double> policy);

/// r_pi(s) = sum_a pi(s, a) sum_s' P(s, a, s') R(s, a, s').
Eigen::VectorXd expected_rewards(const MdpSpec& mdp, std::span<const double> policy);

/// Solves v = r_pi + (P_pi o Gamma) v directly. Throws SingularSystem.
Eigen::VectorXd true_values(const MdpSpec& mdp, std::span<const double> policy);

/// d = d^T P_mu with sum(d) = 1. Throws NotIrreducible when the support graph
/// of P_mu is not strongly connected.
Eigen::VectorXd stationary_distribution(const MdpSpec& mdp, std::span<const double> policy);

/// Feature matrix X (n_states x d) as an Eigen matrix.
Eigen::MatrixXd feature_matrix(const FeatureMap& features);

/**
 * Expected TD(lambda) system under behavior sampling with rho-weighted traces:
 *   A = X^T D (I - lambda P_pi Gamma)^-1 (I - P_pi Gamma) X
 *   b = X^T D (I - lambda P_pi Gamma)^-1 r_pi
 *   C = X^T D X
 * with D = diag(d_mu). `C_inverse` is C^-1, or (C + 1e-8 I)^-1 when C is
 * rank deficient (then `c_regularized` is set).
 */
struct FixedPointSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd C;
  Eigen::MatrixXd C_inverse;
  Eigen::VectorXd d_mu;
  double lambda = 0.0;
  bool c_regularized = false;
};

FixedPointSystem fixed_point_system(const MdpSpec& mdp, const FeatureMap& features,
                                    const PolicyPair& policies, double lambda);

/// Minimum-norm solution of A w = b (the TD fixed point).
Eigen::VectorXd td_fixed_point(const FixedPointSystem& sys);

/// (b - A w)^T C^-1 (b - A w).
double mspbe(std::span<const double> w, const FixedPointSystem& sys);

/// Weight sequences produced by the forward view; index t holds w_t / h_t.
struct ForwardViewResult {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> h;
};

/**
 * Brute-force forward view of true-online HTD(lambda), O(horizon^2 d).
 *
 * For each horizon t the truncated returns G_{k,t} are built backwards from
 * G_{t,t} = rho_t x_t^T w_{t-1} using the online weights w_k, then the weights
 * are replayed from (w_0, h_0) over k = 0..t-1. Requires horizon <=
 * trajectory.size(); x_t for the last horizon is the successor of the last
 * sample.
 */
ForwardViewResult forward_view_tohtd(std::span<const TransitionSample> trajectory,
                                     const FeatureMap& features, const HyperParams& hp,
                                     std::size_t horizon, std::span<const double> w0,
                                     std::span<const double> h0);

}  // namespace tdlab
