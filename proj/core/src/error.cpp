#include "fsmc/error.hpp"

namespace fsmc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RowNotStochastic: return "RowNotStochastic";
    case ErrorCode::LossOutOfRange: return "LossOutOfRange";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::Periodic: return "Periodic";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateObservation: return "DegenerateObservation";
    case ErrorCode::InvalidObservation: return "InvalidObservation";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::HorizonMismatch: return "HorizonMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::RateUnachievable: return "RateUnachievable";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::InfeasibleMu: return "InfeasibleMu";
    case ErrorCode::BadTableFile: return "BadTableFile";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace fsmc
