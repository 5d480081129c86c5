#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fsmc {

enum class ErrorCode {
  RowNotStochastic,
  LossOutOfRange,
  Reducible,
  Periodic,
  DimensionMismatch,
  DegenerateObservation,
  InvalidObservation,
  GridTooCoarse,
  HorizonMismatch,
  NoConvergence,
  RateUnachievable,
  ZeroReference,
  OutOfBounds,
  ConfigInvalid,
  InfeasibleMu,
  BadTableFile,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fsmc
