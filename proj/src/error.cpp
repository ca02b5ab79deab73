#include "kds/error.hpp"

namespace kds {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SubextremalityViolated: return "SubextremalityViolated";
    case ErrorCode::SpinTooLarge: return "SpinTooLarge";
    case ErrorCode::RootFindingFailed: return "RootFindingFailed";
    case ErrorCode::ChartDomainViolation: return "ChartDomainViolation";
    case ErrorCode::SpacelikenessLost: return "SpacelikenessLost";
    case ErrorCode::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorCode::EpsilonUnderflow: return "EpsilonUnderflow";
    case ErrorCode::DegenerateLapse: return "DegenerateLapse";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::UnsupportedBackground: return "UnsupportedBackground";
    case ErrorCode::SignatureLost: return "SignatureLost";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::TimelikenessLost: return "TimelikenessLost";
    case ErrorCode::NonPositiveEnergy: return "NonPositiveEnergy";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::RegularityBudgetExceeded: return "RegularityBudgetExceeded";
    case ErrorCode::NonMonotoneRefinement: return "NonMonotoneRefinement";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ThresholdExceeded: return "ThresholdExceeded";
  }
  return "Unknown";
}

}  // namespace kds
