#pragma once

#include <deque>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "sceneryscope/error.hpp"

namespace sceneryscope {

/// Finite-support step distribution of the walk, keyed by integer offset.
struct IncrementLaw {
  std::map<int, double> support_probs;

  int radius() const;
  double prob(int z) const;
  double variance() const;
};

struct Violation {
  ErrorCode code;
  std::string condition;
  std::string message;
};

struct ValidationResult {
  std::optional<IncrementLaw> law;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks normalisation, symmetry and aperiodicity, collecting every violation.
ValidationResult check_law(const std::map<int, double>& raw);

/// Like check_law but throws the first violation (message lists all of them).
IncrementLaw validate(const std::map<int, double>& raw);

/// P^t(0, .) stored densely on offsets -half_width .. half_width.
template <class Real>
struct TransitionRowT {
  int t = 0;
  int half_width = 0;
  std::vector<Real> probs;

  Real at(long d) const {
    if (d < -half_width || d > half_width) return Real(0);
    return probs[static_cast<std::size_t>(d + half_width)];
  }
};

using TransitionRow = TransitionRowT<double>;

template <class Real>
TransitionRowT<Real> convolve_step(const TransitionRowT<Real>& row,
                                   const IncrementLaw& q) {
  const int R = q.radius();
  TransitionRowT<Real> out;
  out.t = row.t + 1;
  out.half_width = row.half_width + R;
  out.probs.assign(2 * static_cast<std::size_t>(out.half_width) + 1, Real(0));
  for (const auto& [z, pz] : q.support_probs) {
    if (pz == 0.0) continue;
    const Real w(pz);
    for (int i = 0; i < static_cast<int>(row.probs.size()); ++i) {
      out.probs[static_cast<std::size_t>(i + R + z)] += w * row.probs[i];
    }
  }
  return out;
}

/// Exact t-fold convolution in the requested scalar type.
template <class Real>
TransitionRowT<Real> step_distribution_as(const IncrementLaw& q, int t) {
  if (t < 0) fail(ErrorCode::InvalidArgument, "step count must be >= 0");
  TransitionRowT<Real> row;
  row.probs = {Real(1)};
  for (int s = 0; s < t; ++s) row = convolve_step(row, q);
  return row;
}

TransitionRow step_distribution(const IncrementLaw& q, int t);

/// Walk with cached transition rows, return probabilities and weights.
/// Rows up to `exact_limit` come from exact convolution; beyond that
/// P^t(0,d) is evaluated from the characteristic function by Gauss-Legendre
/// quadrature. All members are safe for concurrent use.
class RandomWalk {
 public:
  explicit RandomWalk(IncrementLaw q, int exact_limit = 1024);

  const IncrementLaw& law() const { return q_; }
  int exact_limit() const { return exact_limit_; }

  const TransitionRow& row(int t) const;
  double transition(long t, long d) const;
  double return_probability(long n) const;
  /// w(m, n) = sum_{k=m+1}^{n} u_k^2.
  double weight(long m, long n) const;

  /// Quadrature value of P^t(0,d), exposed for cross-checks.
  double transition_fourier(long t, long d) const;

 private:
  void extend_rows(int t) const;
  void extend_returns(long n) const;

  IncrementLaw q_;
  int exact_limit_;
  double sigma2_;
  mutable std::shared_mutex mu_;
  mutable std::deque<TransitionRow> rows_;
  mutable std::vector<double> u_;
  mutable std::vector<double> w_;
};

}  // namespace sceneryscope
