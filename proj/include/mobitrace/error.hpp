#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mobitrace {

/// Named failure conditions raised by the analytics modules.
enum class ErrorKind {
  EmptyInput,
  OutOfProjectionRange,
  BadPrefix,
  DegenerateTrajectory,
  TooShort,
  BadBinning,
  EmptyPopulation,
  BadArgument,
  TooFewSamples,
  NoConvergence,
  BadConfig,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mobitrace
