#include "upsq/error.hpp"

namespace upsq {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::AboveThreshold: return "above-threshold";
    case ErrorKind::Unit: return "unit";
    case ErrorKind::NoSqueezing: return "no-squeezing";
    case ErrorKind::InconsistentPair: return "inconsistent-pair";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::MarkerDetection: return "marker-detection";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace upsq
