#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sceneryscope/io.hpp"

namespace sceneryscope::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kInsufficientData = 3,
  kNoSignal = 4,
  kNumericFailure = 5,
};

int exit_code_for(ErrorCode code);

struct BenchSpec {
  std::vector<long> n_grid;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<int>> t_vectors;
};

struct RunConfig {
  IncrementLaw q;
  std::optional<Scenery> scenery;
  bool coin_scenery = false;
  std::uint64_t seed = 0;
  long N = 100000;
  std::optional<std::string> observations;
  std::optional<ObsFormat> format;
  std::optional<std::string> out;
  std::optional<SiteLaw> alpha;
  std::optional<bool> coin_mode;
  ReconstructConfig reconstruct;
  std::optional<BenchSpec> bench;
};

/// Parses and validates a config document; unknown keys are rejected.
RunConfig parse_config(const json& doc);

int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_oracle(const RunConfig& cfg, std::ostream& out);
int cmd_reconstruct(const RunConfig& cfg, std::ostream& out);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sceneryscope::cli
