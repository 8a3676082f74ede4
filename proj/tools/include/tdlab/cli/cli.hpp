#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tdlab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
};

/**
 * Runs the `tdlab` command line in-process. `args[0]` is the program name.
 * Progress and results go to `out`, diagnostics to `err`.
 *
 *   tdlab sweep CONFIG [--setting S] [--representation R] [--algorithms a,b] [--out DIR]
 *   tdlab baird [--algorithms a,b] [--metric rmse|rmspbe] [--out DIR]
 *   tdlab runtime --mode table|budget [--c-values 0.5,1] [--out DIR]
 *   tdlab report RESULTS_DIR [--out DIR]
 *   tdlab emit-default-config [--out FILE]
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace tdlab::cli
