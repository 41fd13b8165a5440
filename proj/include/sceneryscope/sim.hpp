#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sceneryscope/lattice_walk.hpp"
#include "sceneryscope/scenery.hpp"

namespace sceneryscope {

using Symbol = std::uint8_t;

/// Philox4x32-10 counter-based generator.
class Philox {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed),
                                             static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(std::uint64_t index, std::uint32_t stream) const;
  /// Uniform double in [0, 1) for (index, stream).
  double uniform(std::uint64_t index, std::uint32_t stream) const;

 private:
  std::array<std::uint32_t, 2> key_;
};

inline constexpr std::uint32_t kWalkStream = 0;
inline constexpr std::uint32_t kObservationStream = 1;

std::vector<long> sample_walk(const IncrementLaw& q, std::size_t steps, std::uint64_t seed);
std::vector<Symbol> observe(const IncrementLaw& q, const Scenery& s, std::size_t steps,
                            std::uint64_t seed);

/// Streaming observations X_0, X_1, ... in constant memory. The walk path is
/// private.
class ObservationStream {
 public:
  ObservationStream(IncrementLaw q, Scenery s, std::uint64_t seed);

  Symbol next();
  std::uint64_t position() const { return position_; }
  const Alphabet& alphabet() const { return scenery_.alphabet(); }

 private:
  IncrementLaw q_;
  Scenery scenery_;
  Philox rng_;
  std::vector<int> offsets_;
  std::vector<double> cdf_;
  std::uint64_t position_ = 0;
  long site_ = 0;
};

}  // namespace sceneryscope
