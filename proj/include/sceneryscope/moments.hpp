#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sceneryscope/lattice_walk.hpp"
#include "sceneryscope/scenery.hpp"
#include "sceneryscope/sim.hpp"
#include "sceneryscope/tensor_algebra.hpp"

namespace sceneryscope {

using TVector = std::vector<int>;

/// n x n matrices T_t(i, j) = P^t(0, j - i) on a window of n consecutive
/// sites, for t = 0..tmax.
template <class Real>
std::vector<Mat<Real>> window_transitions(const std::vector<TransitionRowT<Real>>& rows, int n) {
  std::vector<Mat<Real>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    Mat<Real> T(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) T(i, j) = row.at(j - i);
    }
    out.push_back(std::move(T));
  }
  return out;
}

template <class Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// p_t for a profile v on a window: sum over site tuples of transition
/// products times site values.
template <class Real>
Real exact_p_window(const std::vector<Mat<Real>>& T, const Vec<Real>& v, const TVector& t) {
  Vec<Real> h = v;
  for (std::size_t j = t.size(); j-- > 1;) {
    Vec<Real> next = T.at(t[j]) * h;
    h = v.cwiseProduct(next);
  }
  Vec<Real> u = T.at(t[0]) * v;
  return u.dot(h);
}

/// All r^k entries p_t, t in {1..r}^k, flat row-major. Shared suffix
/// vectors are computed once by depth-first recursion from the last gap.
template <class Real>
std::vector<Real> exact_p_window_tensor(const std::vector<Mat<Real>>& T, const Vec<Real>& v,
                                        int k, int r) {
  if (k < 1 || static_cast<int>(T.size()) <= r) {
    fail(ErrorCode::DimensionMismatch, "transition table too short for r");
  }
  std::vector<Real> out(ipow(static_cast<std::size_t>(r), k), Real(0));
  std::vector<Vec<Real>> lead(static_cast<std::size_t>(r));
  for (int t = 1; t <= r; ++t) lead[t - 1] = T[t] * v;
  const std::size_t stride = ipow(static_cast<std::size_t>(r), k - 1);
  // suffix_index accumulates (t_2..t_k) in row-major order.
  std::function<void(int, const Vec<Real>&, std::size_t, std::size_t)> rec =
      [&](int level, const Vec<Real>& h, std::size_t suffix, std::size_t scale) {
        if (level == 0) {
          for (int t = 1; t <= r; ++t) out[(t - 1) * stride + suffix] = lead[t - 1].dot(h);
          return;
        }
        for (int t = 1; t <= r; ++t) {
          Vec<Real> next = v.cwiseProduct(T[t] * h);
          rec(level - 1, next, suffix + static_cast<std::size_t>(t - 1) * scale, scale * r);
        }
      };
  rec(k - 1, v, 0, 1);
  return out;
}

/// Centred site means of phi on [a, b] for a non-empty scenery.
std::vector<double> centered_profile(const Scenery& s, const TestFunction& phi, long* a = nullptr);

double exact_p(const RandomWalk& walk, const Scenery& s, const TestFunction& phi, const TVector& t);
PVector exact_p_vector(const RandomWalk& walk, const Scenery& s, const TestFunction& phi, int k, int r);

double exact_block_mean(const RandomWalk& walk, const Scenery& s, const TestFunction& phi,
                        const TVector& t, long m, long n);

/// Streaming L_{m,n}: feed X_{m+1}, X_{m+2}, ... in order; a ring buffer
/// of depth sum(t) + 1 holds the pending phi values.
class BlockEstimator {
 public:
  BlockEstimator(const RandomWalk& walk, const TestFunction& phi, TVector t, long m, long n);

  void push(Symbol x);
  bool done() const { return next_index_ > n_ + span_; }
  long needed() const { return n_ + span_ + 1; }
  double value() const;

 private:
  const RandomWalk& walk_;
  std::vector<double> phi_;
  TVector t_;
  long m_, n_, span_;
  std::vector<double> ring_;
  long next_index_ = 0;
  double acc_ = 0;
};

double block_estimate(std::span<const Symbol> obs, const RandomWalk& walk, const TestFunction& phi,
                      const TVector& t, long m, long n);

struct Block {
  long m;
  long n;
  bool operator==(const Block&) const = default;
};

struct BlockSchedule {
  std::vector<Block> blocks;
};

BlockSchedule make_schedule(const RandomWalk& walk, long N);

/// Per-block L values over the complete blocks of the first N observations.
std::vector<double> block_values(std::span<const Symbol> obs, const RandomWalk& walk,
                                 const TestFunction& phi, const TVector& t, long N);
double estimate_p(std::span<const Symbol> obs, const RandomWalk& walk, const TestFunction& phi,
                  const TVector& t, long N);
PVector estimate_p_vector(std::span<const Symbol> obs, const RandomWalk& walk,
                          const TestFunction& phi, int k, int r, long N);

/// Returns p^1(h_0) for family member h at gap bound r.
using P1Access = std::function<PVector(std::size_t h, int r)>;
using TauFn = std::function<double(int m, std::size_t h)>;

struct EllScan {
  int ell = -1;
  /// T[m][h] for every scanned pair.
  std::vector<std::vector<double>> T;
};

int estimate_ell(const P1Access& p1, std::size_t family_size, const RandomWalk& walk, int m_max,
                 double tau, EllScan* scan = nullptr);
int estimate_ell(const P1Access& p1, std::size_t family_size, const RandomWalk& walk, int m_max,
                 const TauFn& tau, EllScan* scan = nullptr);

}  // namespace sceneryscope
