#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tdlab/mdp.hpp"

namespace tdlab {

inline constexpr int kEnvironmentDocumentVersion = 1;

/// Contents of a serialised environment document.
struct EnvironmentDocument {
  MdpSpec mdp;
  FeatureMap features;
  std::optional<PolicyPair> policies;
};

/**
 * Versioned JSON document with fields version, n_states, n_actions,
 * P[s][a][s'], R[s][a][s'], gamma_zero_pairs, default_gamma, features
 * {kind, d, x, aliased_states}, seed and, when given, policies {pi, mu}.
 * Output is deterministic; `indent` < 0 gives the compact form.
 */
std::string environment_to_json(const MdpSpec& mdp, const FeatureMap& features,
                                 const PolicyPair* policies = nullptr, int indent = -1);

/// Parses and validates a document produced by environment_to_json. Throws
/// std::invalid_argument on malformed input or a version mismatch.
EnvironmentDocument environment_from_json(std::string_view text);

/// 64-bit FNV-1a hash, used for config hashes and environment fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace tdlab
