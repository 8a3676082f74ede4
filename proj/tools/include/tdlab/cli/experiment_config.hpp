#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tdlab/harness.hpp"

namespace tdlab::cli {

inline constexpr int kConfigVersion = 1;

/// Invalid configuration or flags; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output; maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Everything a sweep needs. `run.algorithm` is ignored in favour of
 * `algorithms`; an empty list means every algorithm valid for the setting.
 */
struct ExperimentConfig {
  RunConfig run;
  SweepGrid grid;
  std::vector<std::string> algorithms;
  std::string out = "results";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Random-MDP protocol defaults: off-policy, tabular, 30 MDPs x 100 runs.
ExperimentConfig default_experiment_config();

/// Canonical JSON document: fixed key order, two-space indent, trailing newline.
std::string to_json(const ExperimentConfig& config);

/// Missing keys take their defaults; unknown keys, wrong types and a missing
/// or unsupported `version` throw ConfigError.
ExperimentConfig parse_experiment_config(std::string_view text);

/// Throws IoError when the file cannot be read.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Expands the empty list and checks each name against the setting.
/// Throws ConfigError.
std::vector<std::string> resolve_algorithms(const ExperimentConfig& config);

/// Every algorithm that may run in `setting`, in registry order.
std::vector<std::string> algorithms_for(Setting setting);

/// Value of TDLAB_SEED if set. Throws ConfigError when it is not an unsigned
/// 64-bit integer.
std::optional<std::uint64_t> seed_from_environment();

}  // namespace tdlab::cli
