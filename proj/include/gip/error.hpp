#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gip {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  EmptyEffectiveDomain,
  NotAbsolutelyContinuous,
  RepresentativeNotFound,
  TooManyAtomsForExact,
  NoFeasiblePlan,
  MarginalMismatch,
  NegativeCycle,
  UnboundedPotential,
  VertexSetMismatch,
  ConcentratedTarget,
  WeakAleksandrovViolated,
  VerificationFailed,
  MalformedInput,
  UndefinedArithmetic,
};

std::string_view to_string(ErrorCode code);

// Base exception for every failure the library reports. Subclasses carry
// certificates (deficient Hall sets, negative cycles, ...) where one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gip
