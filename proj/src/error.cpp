#include "sceneryscope/error.hpp"

namespace sceneryscope {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::Asymmetric: return "Asymmetric";
    case ErrorCode::Periodic: return "Periodic";
    case ErrorCode::EmptyScenery: return "EmptyScenery";
    case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorCode::NotCentered: return "NotCentered";
    case ErrorCode::InsufficientObservations: return "InsufficientObservations";
    case ErrorCode::HorizonTooSmall: return "HorizonTooSmall";
    case ErrorCode::NoSignal: return "NoSignal";
    case ErrorCode::RankNotReached: return "RankNotReached";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateEndpoint: return "DegenerateEndpoint";
    case ErrorCode::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorCode::OddWidth: return "OddWidth";
    case ErrorCode::AmbiguousPairing: return "AmbiguousPairing";
    case ErrorCode::NoSeparatingFunction: return "NoSeparatingFunction";
    case ErrorCode::InconsistentProfiles: return "InconsistentProfiles";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += std::string(to_string(code));
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(format_message(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(const std::string& stage) const {
  return Error(code_, detail_, stage_.empty() ? stage : stage + "/" + stage_);
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sceneryscope
