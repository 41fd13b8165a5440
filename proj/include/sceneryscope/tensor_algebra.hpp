#pragma once

#include <Eigen/Dense>

#include <vector>

#include "sceneryscope/lattice_walk.hpp"

namespace sceneryscope {

template <class Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// r x (m+1) matrix of P^t(0,d), t = 1..r, d = 0..m, with its left inverse.
template <class Real>
struct MomentMatrixT {
  int m = 0;
  int r = 0;
  Mat<Real> entries;
  Mat<Real> pinv;
  double condition = 0;
  int rank = 0;
};

using MomentMatrix = MomentMatrixT<double>;

struct PVector {
  int k = 0;
  int r = 0;
  std::vector<double> entries;

  double at(const std::vector<int>& t) const;
};

struct QTensor {
  int k = 0;
  int m = 0;
  std::vector<double> entries;

  double at(const std::vector<int>& d) const;
};

/// Row-major flat index of a tuple with entries in [offset, offset + n).
std::size_t flat_index(const std::vector<int>& idx, int n, int offset);
std::vector<int> unflatten(std::size_t flat, int k, int n, int offset);
std::size_t ipow(std::size_t base, int exp);

MomentMatrix build_M(const RandomWalk& walk, int m, int r, double rank_tol = 1e-10);
MomentMatrix choose_r(const RandomWalk& walk, int m, double rank_tol = 1e-10, int r_cap = 128);
bool srw_submatrix_check(int m, const std::vector<int>& times);

QTensor solve_Q(const MomentMatrix& M, int k, const PVector& p);

/// Contract `pinv` along each mode of a flat r^k tensor.
template <class Real>
std::vector<Real> solve_modes(const Mat<Real>& pinv, int k, const std::vector<Real>& p) {
  const int r = static_cast<int>(pinv.cols());
  const int m1 = static_cast<int>(pinv.rows());
  std::vector<int> dims(static_cast<std::size_t>(k), r);
  std::vector<Real> cur = p;
  for (int mode = 0; mode < k; ++mode) {
    std::size_t pre = 1, post = 1;
    for (int j = 0; j < mode; ++j) pre *= dims[j];
    for (int j = mode + 1; j < k; ++j) post *= dims[j];
    std::vector<Real> next(pre * m1 * post, Real(0));
    for (std::size_t a = 0; a < pre; ++a) {
      for (int d = 0; d < m1; ++d) {
        Real* out = &next[(a * m1 + d) * post];
        for (int t = 0; t < r; ++t) {
          const Real c = pinv(d, t);
          if (c == 0) continue;
          const Real* in = &cur[(a * r + t) * post];
          for (std::size_t b = 0; b < post; ++b) out[b] += c * in[b];
        }
      }
    }
    dims[mode] = m1;
    cur = std::move(next);
  }
  return cur;
}

/// Single entry d of the mode-wise solve, without forming the full tensor.
template <class Real>
Real solve_entry(const Mat<Real>& pinv, const std::vector<Real>& p, const std::vector<int>& d) {
  const std::size_t r = static_cast<std::size_t>(pinv.cols());
  const std::size_t k = d.size();
  std::vector<Real> cur = p;
  std::size_t rest = cur.size();
  for (std::size_t mode = 0; mode < k; ++mode) {
    rest /= r;
    std::vector<Real> next(rest, Real(0));
    for (std::size_t t = 0; t < r; ++t) {
      const Real c = pinv(d[mode], static_cast<Eigen::Index>(t));
      if (c == 0) continue;
      const Real* in = &cur[t * rest];
      for (std::size_t b = 0; b < rest; ++b) next[b] += c * in[b];
    }
    cur = std::move(next);
  }
  return cur[0];
}

}  // namespace sceneryscope
