#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "tdlab/cli/experiment_config.hpp"

namespace tdlab::cli {

/// Which cells get per-step curve rows.
enum class CurveScope { all, best, none };
CurveScope parse_curve_scope(const std::string& name);

struct SweepRequest {
  std::string command = "sweep";
  /// `algorithms` already resolved; `out` already applied.
  ExperimentConfig config;
  std::size_t jobs = 0;
  CurveScope raw = CurveScope::all;
  CurveScope aggregated = CurveScope::all;
};

/// Runs every algorithm over the grid and writes the artifact set under
/// config.out.
void execute_sweep(const SweepRequest& request, std::ostream& log);

enum class RuntimeMode { table, budget };

struct RuntimeRequest {
  RuntimeMode mode = RuntimeMode::table;
  RuntimeConfig runtime;
  /// Budget mode only.
  std::vector<double> c_values;
  std::size_t n_iterations = 100;
  std::filesystem::path out = "runtime";
};

void execute_runtime(const RuntimeRequest& request, std::ostream& log);

/// Summarises every sweep under `results` into `out`. Throws IoError when no
/// sweep is found.
void execute_report(const std::filesystem::path& results, const std::filesystem::path& out,
                    std::ostream& log);

}  // namespace tdlab::cli
