#include "tdlab/oracle.hpp"

#include <queue>

namespace tdlab {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr double kRegularization = 1e-8;

void check_policy(const MdpSpec& mdp, std::span<const double> policy) {
  if (policy.size() != mdp.n_states * mdp.n_actions) {
    throw std::invalid_argument("policy table does not match the MDP");
  }
}

bool reaches_all(const Eigen::MatrixXd& P, bool transpose) {
  const auto n = P.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = 1;
  Eigen::Index count = 1;
  while (!frontier.empty()) {
    const auto s = frontier.front();
    frontier.pop();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double p = transpose ? P(t, s) : P(s, t);
      if (p > 0.0 && !seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        ++count;
        frontier.push(t);
      }
    }
  }
  return count == n;
}

}  // namespace

Eigen::MatrixXd policy_transition_matrix(const MdpSpec& mdp, std::span<const double> policy) {
  check_policy(mdp, policy);
  const auto n = mdp.n_states;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const double pa = policy[s * mdp.n_actions + a];
      if (pa == 0.0) continue;
      for (std::size_t t = 0; t < n; ++t) {
        out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) += pa * mdp.p(s, a, t);
      }
    }
  }
  return out;
}

Eigen::MatrixXd discounted_transition_matrix(const MdpSpec& mdp, std::span<const double> policy) {
  Eigen::MatrixXd out = policy_transition_matrix(mdp, policy);
  for (Eigen::Index s = 0; s < out.rows(); ++s) {
    for (Eigen::Index t = 0; t < out.cols(); ++t) {
      out(s, t) *= mdp.gamma_of(static_cast<std::size_t>(s), static_cast<std::size_t>(t));
    }
  }
  return out;
}

Eigen::VectorXd expected_rewards(const MdpSpec& mdp, std::span<const double> policy) {
  check_policy(mdp, policy);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mdp.n_states));
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    double acc = 0.0;
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const double pa = policy[s * mdp.n_actions + a];
      for (std::size_t t = 0; t < mdp.n_states; ++t) acc += pa * mdp.p(s, a, t) * mdp.r(s, a, t);
    }
    r(static_cast<Eigen::Index>(s)) = acc;
  }
  return r;
}

Eigen::VectorXd true_values(const MdpSpec& mdp, std::span<const double> policy) {
  const Eigen::MatrixXd PG = discounted_transition_matrix(mdp, policy);
  const Eigen::VectorXd r = expected_rewards(mdp, policy);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(PG.rows(), PG.cols()) - PG;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw SingularSystem("true_values: I - P_pi Gamma is singular");
  Eigen::VectorXd v = lu.solve(r);
  if ((M * v - r).lpNorm<Eigen::Infinity>() > kResidualTolerance * (1.0 + v.lpNorm<Eigen::Infinity>())) {
    throw SingularSystem("true_values: solve residual too large");
  }
  return v;
}

Eigen::VectorXd stationary_distribution(const MdpSpec& mdp, std::span<const double> policy) {
  const Eigen::MatrixXd P = policy_transition_matrix(mdp, policy);
  if (!reaches_all(P, false) || !reaches_all(P, true)) {
    throw NotIrreducible("stationary_distribution: behavior chain is not irreducible");
  }
  const auto n = P.rows();
  // (P^T - I) d = 0 with the last equation replaced by sum(d) = 1.
  Eigen::MatrixXd M = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  M.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw NotIrreducible("stationary_distribution: no unique solution");
  Eigen::VectorXd d = lu.solve(rhs);
  const double residual = (d.transpose() * P - d.transpose()).lpNorm<Eigen::Infinity>();
  if (residual > kResidualTolerance || d.minCoeff() < -kResidualTolerance) {
    throw NotIrreducible("stationary_distribution: solve did not converge");
  }
  d = d.cwiseMax(0.0);
  return d / d.sum();
}

Eigen::MatrixXd feature_matrix(const FeatureMap& features) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(features.x.data(), static_cast<Eigen::Index>(features.n_states),
                                    static_cast<Eigen::Index>(features.d));
}

FixedPointSystem fixed_point_system(const MdpSpec& mdp, const FeatureMap& features,
                                    const PolicyPair& policies, double lambda) {
  if (features.n_states != mdp.n_states) {
    throw std::invalid_argument("fixed_point_system: feature map does not match the MDP");
  }
  FixedPointSystem sys;
  sys.lambda = lambda;
  sys.d_mu = stationary_distribution(mdp, policies.mu);
  const Eigen::MatrixXd X = feature_matrix(features);
  const Eigen::MatrixXd PG = discounted_transition_matrix(mdp, policies.pi);
  const Eigen::VectorXd r = expected_rewards(mdp, policies.pi);
  const auto n = PG.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  // Z^T = X^T D (I - lambda P Gamma)^-1, computed as a solve on the transpose.
  Eigen::FullPivLU<Eigen::MatrixXd> trace_lu((I - lambda * PG).transpose());
  if (!trace_lu.isInvertible()) {
    throw SingularSystem("fixed_point_system: I - lambda P_pi Gamma is singular");
  }
  const Eigen::MatrixXd XtD = X.transpose() * sys.d_mu.asDiagonal();
  const Eigen::MatrixXd Zt = trace_lu.solve(XtD.transpose()).transpose();
  sys.A = Zt * (I - PG) * X;
  sys.b = Zt * r;
  sys.C = XtD * X;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.C);
  const double max_ev = eig.eigenvalues().maxCoeff();
  const double min_ev = eig.eigenvalues().minCoeff();
  Eigen::MatrixXd C = sys.C;
  if (!(min_ev > 1e-12 * std::max(1.0, max_ev))) {
    C += kRegularization * Eigen::MatrixXd::Identity(C.rows(), C.cols());
    sys.c_regularized = true;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem("fixed_point_system: C is singular after regularization");
  }
  sys.C_inverse = llt.solve(Eigen::MatrixXd::Identity(C.rows(), C.cols()));
  return sys;
}

Eigen::VectorXd td_fixed_point(const FixedPointSystem& sys) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sys.A);
  return cod.solve(sys.b);
}

double mspbe(std::span<const double> w, const FixedPointSystem& sys) {
  if (static_cast<Eigen::Index>(w.size()) != sys.b.size()) {
    throw DimensionMismatch("mspbe: weight dimension mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::VectorXd residual = sys.b - sys.A * wv;
  return std::max(0.0, residual.dot(sys.C_inverse * residual));
}

ForwardViewResult forward_view_tohtd(std::span<const TransitionSample> trajectory,
                                     const FeatureMap& features, const HyperParams& hp,
                                     std::size_t horizon, std::span<const double> w0,
                                     std::span<const double> h0) {
  if (horizon > trajectory.size()) {
    throw std::invalid_argument("forward_view_tohtd: horizon exceeds trajectory length");
  }
  const std::size_t d = features.d;
  if (w0.size() != d || h0.size() != d) {
    throw DimensionMismatch("forward_view_tohtd: initial weight dimension mismatch");
  }
  const double a = hp.alpha;
  const double ah = hp.alpha_h();
  const double lam = hp.lambda;
  const std::size_t T = horizon;

  auto x_at = [&](std::size_t k) {
    return k < trajectory.size() ? features(trajectory[k].s) : features(trajectory[k - 1].s_next);
  };
  auto rho_at = [&](std::size_t k) { return k < trajectory.size() ? trajectory[k].rho : 1.0; };
  auto dot = [](std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  };

  // Traces e_k (rho-weighted) and e^mu_k do not depend on the weights.
  std::vector<std::vector<double>> e(T, std::vector<double>(d, 0.0));
  std::vector<std::vector<double>> e_mu(T, std::vector<double>(d, 0.0));
  for (std::size_t k = 0; k < T; ++k) {
    const double gamma_k = k == 0 ? 0.0 : trajectory[k - 1].gamma_next;
    const auto x = x_at(k);
    for (std::size_t i = 0; i < d; ++i) {
      const double prev_e = k == 0 ? 0.0 : e[k - 1][i];
      const double prev_mu = k == 0 ? 0.0 : e_mu[k - 1][i];
      e[k][i] = trajectory[k].rho * (lam * gamma_k * prev_e + x[i]);
      e_mu[k][i] = lam * gamma_k * prev_mu + x[i];
    }
  }

  ForwardViewResult out;
  out.w.assign(1, std::vector<double>(w0.begin(), w0.end()));
  out.h.assign(1, std::vector<double>(h0.begin(), h0.end()));

  std::vector<double> G(T + 1, 0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    // Truncated returns, built backwards from G_{t,t}.
    G[t] = rho_at(t) * dot(x_at(t), out.w[t - 1]);
    for (std::size_t k = t; k-- > 0;) {
      const auto& s = trajectory[k];
      const double rho_next = rho_at(k + 1);
      G[k] = s.rho * (s.reward +
                      s.gamma_next * (1.0 - lam * rho_next) * dot(x_at(k + 1), out.w[k]) +
                      s.gamma_next * lam * G[k + 1]);
    }

    std::vector<double> w(w0.begin(), w0.end());
    std::vector<double> h(h0.begin(), h0.end());
    for (std::size_t k = 0; k < t; ++k) {
      const auto xk = x_at(k);
      const auto xk1 = x_at(k + 1);
      const double gn = trajectory[k].gamma_next;
      const auto& h_online = out.h[k];
      double corr_w = 0.0, corr_h = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        corr_w += (e[k][i] - e_mu[k][i]) * h_online[i];
        corr_h += e_mu[k][i] * h_online[i];
      }
      const double err = G[k] - trajectory[k].rho * dot(xk, w);
      for (std::size_t i = 0; i < d; ++i) {
        const double u = xk[i] - gn * xk1[i];
        w[i] += a * err * xk[i] + a * u * corr_w;
        h[i] += ah * err * xk[i] - ah * u * corr_h;
      }
    }
    out.w.push_back(std::move(w));
    out.h.push_back(std::move(h));
  }
  return out;
}

}  // namespace tdlab
