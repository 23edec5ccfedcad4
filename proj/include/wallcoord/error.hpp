#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wallcoord {

enum class ErrorCode {
  ParseError,
  InvalidSpec,
  MissingLeafQuality,
  EmptyWall,
  NoEligibleAgent,
  UnknownAction,
  UnknownAgent,
  EmptyAgentSet,
  BadWeights,
  BadDelta,
  InfeasibleTask,
  InfeasibleDimensions,
  NotComplexlyRedundant,
  TooFewAgents,
  Deadlock,
  EmptySet,
  CoordinationTimeout,
  TooLarge,
  UnsupportedJointTask,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wallcoord
