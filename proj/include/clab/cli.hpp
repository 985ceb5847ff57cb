#pragma once

#include <iosfwd>

namespace clab {

/// Exit codes of the batch driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNonConvergence = 2,
  kExitIo = 3,
};

/// clab --config <path> --out <dir> --command <plan|verify|make-instance|reconstruct|sweep|all>
///      [--seed-override <u64>] [--quiet]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clab
