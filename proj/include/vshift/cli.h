#ifndef VSHIFT_CLI_H_
#define VSHIFT_CLI_H_

#include <iosfwd>

namespace vshift {
namespace cli {

// Process exit codes. Listed in `vshift --help`.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,          // unknown flag, missing argument, bad flag value
  kIo = 3,             // unreadable or unwritable file
  kFormat = 4,         // malformed PPM/PGM/JSON/checkpoint
  kManifest = 5,       // manifest validation failure
  kInvalidInput = 6,   // invariant violation (shift bound, config range, ...)
  kDegenerateView = 7,
  kBuildAborted = 8,
  kVerifyMismatch = 9,
};

// Parses argv and runs one subcommand. Errors are reported on `err` as a
// single JSON line {"error": kind, "message": ..., "exit_code": n}.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace cli
}  // namespace vshift

#endif  // VSHIFT_CLI_H_
