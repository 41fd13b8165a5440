#include "sceneryscope/sim.hpp"

#include <algorithm>

namespace sceneryscope {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

struct StepSampler {
  std::vector<int> offsets;
  std::vector<double> cdf;

  explicit StepSampler(const IncrementLaw& q) {
    double c = 0;
    for (const auto& [z, p] : q.support_probs) {
      if (p <= 0) continue;
      c += p;
      offsets.push_back(z);
      cdf.push_back(c);
    }
    cdf.back() = 1.0;
  }

  int draw(double u) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return offsets[static_cast<std::size_t>(it - cdf.begin())];
  }
};

Symbol draw_symbol(const SiteLaw& law, double u) {
  double c = 0;
  const std::size_t n = law.probs.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    c += law.probs[i];
    if (u < c) return static_cast<Symbol>(i);
  }
  return static_cast<Symbol>(n - 1);
}

void check_alphabet(const Scenery& s) {
  if (s.alphabet().size() > 256) {
    fail(ErrorCode::InvalidArgument, "alphabets above 256 symbols are not supported");
  }
}

}  // namespace

Philox::Block Philox::operator()(std::uint64_t index, std::uint32_t stream) const {
  Block c{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, 0u};
  std::uint32_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kW0;
    k1 += kW1;
  }
  return c;
}

double Philox::uniform(std::uint64_t index, std::uint32_t stream) const {
  Block b = (*this)(index, stream);
  std::uint64_t bits = (static_cast<std::uint64_t>(b[0]) << 21) ^ (b[1] >> 11);
  return static_cast<double>(bits & ((1ull << 53) - 1)) * 0x1.0p-53;
}

std::vector<long> sample_walk(const IncrementLaw& q, std::size_t steps, std::uint64_t seed) {
  StepSampler sampler(q);
  Philox rng(seed);
  std::vector<long> path(steps + 1);
  path[0] = 0;
  for (std::size_t n = 1; n <= steps; ++n) {
    path[n] = path[n - 1] + sampler.draw(rng.uniform(n, kWalkStream));
  }
  return path;
}

std::vector<Symbol> observe(const IncrementLaw& q, const Scenery& s, std::size_t steps,
                            std::uint64_t seed) {
  check_alphabet(s);
  std::vector<long> path = sample_walk(q, steps, seed);
  Philox rng(seed);
  std::vector<Symbol> out(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    out[n] = draw_symbol(s.law_at(path[n]), rng.uniform(n, kObservationStream));
  }
  return out;
}

ObservationStream::ObservationStream(IncrementLaw q, Scenery s, std::uint64_t seed)
    : q_(std::move(q)), scenery_(std::move(s)), rng_(seed) {
  check_alphabet(scenery_);
  StepSampler sampler(q_);
  offsets_ = std::move(sampler.offsets);
  cdf_ = std::move(sampler.cdf);
}

Symbol ObservationStream::next() {
  if (position_ > 0) {
    double u = rng_.uniform(position_, kWalkStream);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    site_ += offsets_[static_cast<std::size_t>(it - cdf_.begin())];
  }
  Symbol x = draw_symbol(scenery_.law_at(site_), rng_.uniform(position_, kObservationStream));
  ++position_;
  return x;
}

}  // namespace sceneryscope
