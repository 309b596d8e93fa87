#include "mobitrace/error.hpp"

namespace mobitrace {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::OutOfProjectionRange: return "OutOfProjectionRange";
    case ErrorKind::BadPrefix: return "BadPrefix";
    case ErrorKind::DegenerateTrajectory: return "DegenerateTrajectory";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::BadBinning: return "BadBinning";
    case ErrorKind::EmptyPopulation: return "EmptyPopulation";
    case ErrorKind::BadArgument: return "BadArgument";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace mobitrace
