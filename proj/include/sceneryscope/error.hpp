#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sceneryscope {

enum class ErrorCode {
  NotNormalized,
  Asymmetric,
  Periodic,
  EmptyScenery,
  AlphabetMismatch,
  NotCentered,
  InsufficientObservations,
  HorizonTooSmall,
  NoSignal,
  RankNotReached,
  DimensionMismatch,
  DegenerateEndpoint,
  NegativeDiscriminant,
  OddWidth,
  AmbiguousPairing,
  NoSeparatingFunction,
  InconsistentProfiles,
  InvalidArgument,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `stage()` names the pipeline step that raised it
/// (empty for errors raised outside a staged pipeline).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  // Returns a copy with the stage label set (keeps an existing inner label
  // as a prefix: "outer/inner").
  Error with_stage(const std::string& stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace sceneryscope
