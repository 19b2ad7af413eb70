#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace upsq {

/// Failure categories raised by the library. The command-line tool maps
/// these onto its exit codes, so the set is part of the public contract.
enum class ErrorKind {
  InvalidArgument,   // malformed input or violated precondition
  Domain,            // value outside the mathematical domain (log of <= 0, division by 0)
  AboveThreshold,    // pump at or above OPA threshold
  Unit,              // trace in the wrong unit for the requested operation
  NoSqueezing,       // pair carries no squeezing to invert
  InconsistentPair,  // pair not reachable from a pure state through loss
  Infeasible,        // requested target unreachable with the given source
  MarkerDetection,   // modulation markers in a cavity scan not resolvable
  Io,                // file could not be read, parsed, or written
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) raise(kind, what);
}

}  // namespace upsq
