#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kds {

/// Machine-readable failure categories. The CLI reports the name verbatim.
enum class ErrorCode {
  InvalidArgument,
  SubextremalityViolated,
  SpinTooLarge,
  RootFindingFailed,
  ChartDomainViolation,
  SpacelikenessLost,
  StencilOutOfDomain,
  EpsilonUnderflow,
  DegenerateLapse,
  GridTooCoarse,
  UnsupportedBackground,
  SignatureLost,
  NonFiniteState,
  TimelikenessLost,
  NonPositiveEnergy,
  WindowTooShort,
  RegularityBudgetExceeded,
  NonMonotoneRefinement,
  ConfigError,
  IoError,
  ThresholdExceeded,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace kds
