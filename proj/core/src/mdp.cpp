#include "tdlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tdlab {

namespace {

constexpr double kRowTolerance = 1e-12;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

}  // namespace

MdpSpec::MdpSpec(std::size_t n_states_, std::size_t n_actions_, double default_gamma_)
    : n_states(n_states_),
      n_actions(n_actions_),
      default_gamma(default_gamma_),
      P(n_states_ * n_actions_ * n_states_, 0.0),
      R(n_states_ * n_actions_ * n_states_, 0.0),
      gamma(n_states_ * n_states_, default_gamma_) {}

std::vector<std::pair<std::size_t, std::size_t>> MdpSpec::gamma_zero_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t t = 0; t < n_states; ++t) {
      if (gamma_of(s, t) == 0.0) pairs.emplace_back(s, t);
    }
  }
  return pairs;
}

void validate(const MdpSpec& mdp, long expected_zero_pairs) {
  const std::size_t n = mdp.n_states;
  const std::size_t m = mdp.n_actions;
  if (n == 0 || m == 0) fail("mdp: empty state or action set");
  if (mdp.P.size() != n * m * n || mdp.R.size() != n * m * n || mdp.gamma.size() != n * n) {
    fail("mdp: table sizes do not match n_states/n_actions");
  }
  if (!(mdp.default_gamma >= 0.0 && mdp.default_gamma < 1.0)) {
    fail("mdp: default_gamma must lie in [0, 1)");
  }
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < m; ++a) {
      double total = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double p = mdp.p(s, a, t);
        if (!(p >= 0.0)) fail("mdp: negative transition probability");
        total += p;
        const double r = mdp.r(s, a, t);
        if (!(r >= 0.0 && r <= 1.0)) fail("mdp: reward outside [0, 1]");
      }
      if (std::abs(total - 1.0) > kRowTolerance) {
        std::ostringstream os;
        os << "mdp: row (" << s << ", " << a << ") sums to " << total;
        fail(os.str());
      }
    }
  }
  for (double g : mdp.gamma) {
    if (g != 0.0 && g != mdp.default_gamma) fail("mdp: discount neither 0 nor default_gamma");
  }
  if (expected_zero_pairs >= 0 &&
      mdp.gamma_zero_pairs().size() != static_cast<std::size_t>(expected_zero_pairs)) {
    fail("mdp: unexpected number of terminating transitions");
  }
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::tabular: return "tabular";
    case FeatureKind::aliased_tabular: return "aliased-tabular";
    case FeatureKind::binary: return "binary";
    case FeatureKind::custom: return "custom";
  }
  return "custom";
}

FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "tabular") return FeatureKind::tabular;
  if (name == "aliased-tabular") return FeatureKind::aliased_tabular;
  if (name == "binary") return FeatureKind::binary;
  if (name == "custom") return FeatureKind::custom;
  fail("unknown representation '" + std::string(name) +
       "' (expected tabular, aliased-tabular or binary)");
}

PolicyPair make_policy_pair(std::size_t n_states, std::size_t n_actions, std::vector<double> pi,
                            std::vector<double> mu) {
  if (pi.size() != n_states * n_actions || mu.size() != n_states * n_actions) {
    fail("policy: table size mismatch");
  }
  PolicyPair out;
  out.n_states = n_states;
  out.n_actions = n_actions;
  out.pi = std::move(pi);
  out.mu = std::move(mu);
  out.rho.assign(n_states * n_actions, 0.0);
  out.base_action.assign(n_states, 0);
  for (std::size_t s = 0; s < n_states; ++s) {
    double sum_pi = 0.0, sum_mu = 0.0;
    for (std::size_t a = 0; a < n_actions; ++a) {
      const double p = out.target(s, a);
      const double q = out.behavior(s, a);
      if (p < 0.0 || q < 0.0) fail("policy: negative probability");
      if (p > 0.0 && q <= 0.0) fail("policy: behavior must cover the target policy");
      sum_pi += p;
      sum_mu += q;
      out.rho[s * n_actions + a] = q > 0.0 ? p / q : 0.0;
      if (p > out.target(s, out.base_action[s])) out.base_action[s] = a;
    }
    if (std::abs(sum_pi - 1.0) > kRowTolerance || std::abs(sum_mu - 1.0) > kRowTolerance) {
      fail("policy: rows must sum to one");
    }
  }
  return out;
}

MdpSpec generate_random_mdp(std::size_t n_states, std::size_t n_actions, std::size_t branching,
                            std::size_t n_terminating, std::uint64_t seed, double default_gamma) {
  if (n_states == 0 || n_actions == 0) fail("generate_random_mdp: empty state or action set");
  if (branching == 0 || branching > n_states) {
    fail("generate_random_mdp: branching must lie in [1, n_states]");
  }
  if (n_terminating > n_states * n_states) {
    fail("generate_random_mdp: n_terminating exceeds n_states^2");
  }
  MdpSpec mdp(n_states, n_actions, default_gamma);
  mdp.seed = seed;
  Rng rng(seed);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      const auto next = rng.sample_without_replacement(n_states, branching);
      std::vector<double> weights(branching);
      double total = 0.0;
      do {
        total = 0.0;
        for (auto& w : weights) {
          w = rng.uniform();
          total += w;
        }
      } while (total <= 0.0);
      for (std::size_t i = 0; i < branching; ++i) {
        mdp.p(s, a, next[i]) = weights[i] / total;
        mdp.r(s, a, next[i]) = rng.uniform();
      }
      // Make the row sum exact to rounding by assigning the remainder.
      double partial = 0.0;
      for (std::size_t i = 0; i + 1 < branching; ++i) partial += mdp.p(s, a, next[i]);
      mdp.p(s, a, next[branching - 1]) = std::max(0.0, 1.0 - partial);
    }
  }

  // Terminating transitions are chosen among pairs that can actually occur.
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t t = 0; t < n_states; ++t) {
      if (s == t) continue;
      for (std::size_t a = 0; a < n_actions; ++a) {
        if (mdp.p(s, a, t) > 0.0) {
          candidates.emplace_back(s, t);
          break;
        }
      }
    }
  }
  if (n_terminating > candidates.size()) {
    fail("generate_random_mdp: not enough reachable transitions to terminate");
  }
  for (auto idx : rng.sample_without_replacement(candidates.size(), n_terminating)) {
    mdp.set_terminating(candidates[idx].first, candidates[idx].second);
  }
  return mdp;
}

FeatureMap make_features(const MdpSpec& mdp, FeatureKind kind, std::uint64_t seed) {
  const std::size_t n = mdp.n_states;
  FeatureMap fm;
  fm.kind = kind;
  fm.n_states = n;
  switch (kind) {
    case FeatureKind::tabular: {
      fm.d = n;
      fm.x.assign(n * n, 0.0);
      for (std::size_t s = 0; s < n; ++s) fm.row(s)[s] = 1.0;
      break;
    }
    case FeatureKind::aliased_tabular: {
      if (n < kAliasedStateCount) fail("make_features: too few states to alias");
      fm.d = n;
      fm.x.assign(n * n, 0.0);
      Rng rng(seed);
      fm.aliased_states = rng.sample_without_replacement(n, kAliasedStateCount);
      std::sort(fm.aliased_states.begin(), fm.aliased_states.end());
      const std::size_t representative = fm.aliased_states.front();
      for (std::size_t s = 0; s < n; ++s) {
        const bool aliased = std::binary_search(fm.aliased_states.begin(),
                                                fm.aliased_states.end(), s);
        fm.row(s)[aliased ? representative : s] = 1.0;
      }
      break;
    }
    case FeatureKind::binary: {
      std::size_t d = 0;
      while ((std::size_t{1} << d) < n + 1) ++d;
      fm.d = d;
      fm.x.assign(n * d, 0.0);
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t code = s + 1;
        auto row = fm.row(s);
        double ones = 0.0;
        for (std::size_t bit = 0; bit < d; ++bit) {
          if ((code >> (d - 1 - bit)) & 1U) {
            row[bit] = 1.0;
            ones += 1.0;
          }
        }
        const double norm = std::sqrt(ones);
        for (auto& v : row) v /= norm;
      }
      break;
    }
    case FeatureKind::custom:
      fail("make_features: custom features must be built explicitly");
  }
  return fm;
}

PolicyPair make_policies(const MdpSpec& mdp, double base_pi, double base_mu, std::uint64_t seed) {
  if (!(base_pi > 0.0 && base_pi <= 1.0) || !(base_mu > 0.0 && base_mu <= 1.0)) {
    fail("make_policies: base probabilities must lie in (0, 1]");
  }
  const std::size_t n = mdp.n_states;
  const std::size_t m = mdp.n_actions;
  std::vector<double> pi(n * m), mu(n * m);
  Rng rng(seed);
  std::vector<std::size_t> base(n);
  for (std::size_t s = 0; s < n; ++s) {
    base[s] = rng.uniform_index(m);
    for (std::size_t a = 0; a < m; ++a) {
      if (m == 1) {
        pi[s] = mu[s] = 1.0;
      } else if (a == base[s]) {
        pi[s * m + a] = base_pi;
        mu[s * m + a] = base_mu;
      } else {
        pi[s * m + a] = (1.0 - base_pi) / static_cast<double>(m - 1);
        mu[s * m + a] = (1.0 - base_mu) / static_cast<double>(m - 1);
      }
    }
  }
  auto out = make_policy_pair(n, m, std::move(pi), std::move(mu));
  out.base_action = std::move(base);
  return out;
}

TransitionSample sample_step(const MdpSpec& mdp, const PolicyPair& policies, std::size_t s,
                             Rng& rng) {
  TransitionSample t;
  t.s = s;
  t.a = rng.categorical(policies.behavior_row(s));
  t.s_next = rng.categorical(mdp.successors(s, t.a));
  t.reward = mdp.r(s, t.a, t.s_next);
  t.gamma_next = mdp.gamma_of(s, t.s_next);
  t.rho = policies.ratio(s, t.a);
  return t;
}

Environment make_baird() {
  constexpr std::size_t n = 7;
  constexpr std::size_t dashed = 0;
  constexpr std::size_t solid = 1;
  Environment env;
  env.mdp = MdpSpec(n, 2, 0.99);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < 6; ++t) env.mdp.p(s, dashed, t) = 1.0 / 6.0;
    env.mdp.p(s, solid, 6) = 1.0;
  }

  env.features.kind = FeatureKind::custom;
  env.features.n_states = n;
  env.features.d = 8;
  env.features.x.assign(n * 8, 0.0);
  for (std::size_t s = 0; s < 6; ++s) {
    env.features.row(s)[s] = 2.0;
    env.features.row(s)[7] = 1.0;
  }
  env.features.row(6)[6] = 1.0;
  env.features.row(6)[7] = 2.0;

  std::vector<double> pi(n * 2), mu(n * 2);
  for (std::size_t s = 0; s < n; ++s) {
    pi[s * 2 + dashed] = 0.0;
    pi[s * 2 + solid] = 1.0;
    mu[s * 2 + dashed] = 6.0 / 7.0;
    mu[s * 2 + solid] = 1.0 / 7.0;
  }
  env.policies = make_policy_pair(n, 2, std::move(pi), std::move(mu));
  env.initial_weights = {1, 1, 1, 1, 1, 1, 10, 1};
  return env;
}

}  // namespace tdlab
