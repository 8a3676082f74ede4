#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdlab/rng.hpp"

namespace tdlab {

/**
 * Tabular MDP with deterministic expected rewards and a discount attached to
 * each transition (s, s').
 *
 * Storage is dense: P and R are indexed [(s * n_actions + a) * n_states + s'],
 * the discount table [s * n_states + s']. Terminating transitions carry a
 * discount of 0 and do not reset the process; the stream stays continuing.
 */
struct MdpSpec {
  MdpSpec() = default;
  MdpSpec(std::size_t n_states, std::size_t n_actions, double default_gamma);

  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  double default_gamma = 0.9;
  std::uint64_t seed = 0;
  std::vector<double> P;
  std::vector<double> R;
  std::vector<double> gamma;

  double& p(std::size_t s, std::size_t a, std::size_t s_next) { return P[index(s, a, s_next)]; }
  double p(std::size_t s, std::size_t a, std::size_t s_next) const { return P[index(s, a, s_next)]; }
  double& r(std::size_t s, std::size_t a, std::size_t s_next) { return R[index(s, a, s_next)]; }
  double r(std::size_t s, std::size_t a, std::size_t s_next) const { return R[index(s, a, s_next)]; }
  double& gamma_of(std::size_t s, std::size_t s_next) { return gamma[s * n_states + s_next]; }
  double gamma_of(std::size_t s, std::size_t s_next) const { return gamma[s * n_states + s_next]; }

  /// Successor distribution P(s, a, .).
  std::span<const double> successors(std::size_t s, std::size_t a) const {
    return {P.data() + (s * n_actions + a) * n_states, n_states};
  }

  /// Transition pairs whose discount is zero, in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> gamma_zero_pairs() const;

  /// Marks (s, s') as terminating (discount 0).
  void set_terminating(std::size_t s, std::size_t s_next) { gamma_of(s, s_next) = 0.0; }

  friend bool operator==(const MdpSpec&, const MdpSpec&) = default;

 private:
  std::size_t index(std::size_t s, std::size_t a, std::size_t s_next) const {
    return (s * n_actions + a) * n_states + s_next;
  }
};

/// Throws std::invalid_argument describing the first violated invariant:
/// row-stochastic P (1e-12), nonnegative entries, R in [0, 1], every discount
/// either 0 or default_gamma, and (when `expected_zero_pairs` >= 0) exactly
/// that many zero-discount pairs.
void validate(const MdpSpec& mdp, long expected_zero_pairs = -1);

enum class FeatureKind { tabular, aliased_tabular, binary, custom };

std::string_view to_string(FeatureKind kind);
/// Accepts "tabular", "aliased-tabular", "binary", "custom".
FeatureKind parse_feature_kind(std::string_view name);

/// Per-state feature vectors stored row-major (n_states x d).
struct FeatureMap {
  FeatureKind kind = FeatureKind::tabular;
  std::size_t n_states = 0;
  std::size_t d = 0;
  std::vector<double> x;
  std::vector<std::size_t> aliased_states;

  std::span<const double> operator()(std::size_t s) const { return {x.data() + s * d, d}; }
  std::span<double> row(std::size_t s) { return {x.data() + s * d, d}; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

/// Number of aliased states in the aliased-tabular representation.
inline constexpr std::size_t kAliasedStateCount = 5;

/// Target / behavior action probabilities and their ratio table.
struct PolicyPair {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> pi;
  std::vector<double> mu;
  std::vector<double> rho;
  std::vector<std::size_t> base_action;

  double target(std::size_t s, std::size_t a) const { return pi[s * n_actions + a]; }
  double behavior(std::size_t s, std::size_t a) const { return mu[s * n_actions + a]; }
  double ratio(std::size_t s, std::size_t a) const { return rho[s * n_actions + a]; }
  std::span<const double> behavior_row(std::size_t s) const {
    return {mu.data() + s * n_actions, n_actions};
  }
  std::span<const double> target_row(std::size_t s) const {
    return {pi.data() + s * n_actions, n_actions};
  }

  friend bool operator==(const PolicyPair&, const PolicyPair&) = default;
};

/// Builds a pair from explicit tables (row-major n_states x n_actions).
/// Throws std::invalid_argument if rows do not sum to one or mu(s,a) = 0
/// where pi(s,a) > 0.
PolicyPair make_policy_pair(std::size_t n_states, std::size_t n_actions,
                            std::vector<double> pi, std::vector<double> mu);

/// One transition of the behavior process with everything a learner needs.
struct TransitionSample {
  std::size_t s = 0;
  std::size_t a = 0;
  std::size_t s_next = 0;
  double reward = 0.0;
  double gamma_next = 0.0;
  double rho = 1.0;
  double interest = 1.0;
};

/**
 * Random MDP: for each (s, a), `branching` distinct successors drawn from all
 * states without replacement, probabilities uniform in [0, 1) normalised,
 * expected rewards uniform in [0, 1). `n_terminating` distinct reachable
 * pairs (s, s'), s != s', get discount 0; every other pair default_gamma.
 */
MdpSpec generate_random_mdp(std::size_t n_states, std::size_t n_actions, std::size_t branching,
                            std::size_t n_terminating, std::uint64_t seed,
                            double default_gamma = 0.9);

/// Tabular, aliased-tabular (5 random states share the vector of the lowest
/// of them) or binary (bits of s + 1, most significant first). All rows unit
/// norm. `seed` only matters for the aliased representation.
FeatureMap make_features(const MdpSpec& mdp, FeatureKind kind, std::uint64_t seed);

/// A random base action per state gets `base_pi` under the target policy and
/// `base_mu` under the behavior policy; the remainder is split evenly.
PolicyPair make_policies(const MdpSpec& mdp, double base_pi, double base_mu, std::uint64_t seed);

/// a ~ mu(s, .), s' ~ P(s, a, .); reward, discount and ratio read from tables.
TransitionSample sample_step(const MdpSpec& mdp, const PolicyPair& policies, std::size_t s,
                             Rng& rng);

/// Everything needed to run a learner on a problem.
struct Environment {
  MdpSpec mdp;
  FeatureMap features;
  PolicyPair policies;
  std::vector<double> initial_weights;
};

/**
 * Seven-state star counterexample: dashed action (probability 6/7 under the
 * behavior policy) jumps uniformly to states 0..5, solid action goes to state
 * 6 and is always taken by the target policy. Zero rewards, discount 0.99,
 * eight unnormalised features and initial weights (1,1,1,1,1,1,10,1).
 */
Environment make_baird();

}  // namespace tdlab
