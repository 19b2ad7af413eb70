#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "upsq/error.hpp"

namespace upsq::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;        // bad arguments, domain errors
inline constexpr int kExitInconsistent = 3;  // data the model cannot explain
inline constexpr int kExitIo = 4;

int exit_code(ErrorKind kind) noexcept;

/// Runs one command. `args` excludes the program name. Reports go to `out`,
/// diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace upsq::cli
