#include "sceneryscope/tensor_algebra.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <set>

namespace sceneryscope {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

std::size_t flat_index(const std::vector<int>& idx, int n, int offset) {
  std::size_t f = 0;
  for (int v : idx) {
    int j = v - offset;
    if (j < 0 || j >= n) fail(ErrorCode::DimensionMismatch, "tensor index out of range");
    f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
  }
  return f;
}

std::vector<int> unflatten(std::size_t flat, int k, int n, int offset) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int j = k - 1; j >= 0; --j) {
    idx[j] = static_cast<int>(flat % n) + offset;
    flat /= n;
  }
  return idx;
}

double PVector::at(const std::vector<int>& t) const {
  if (static_cast<int>(t.size()) != k) fail(ErrorCode::DimensionMismatch, "wrong tuple length");
  return entries.at(flat_index(t, r, 1));
}

double QTensor::at(const std::vector<int>& d) const {
  if (static_cast<int>(d.size()) != k) fail(ErrorCode::DimensionMismatch, "wrong tuple length");
  return entries.at(flat_index(d, m + 1, 0));
}

MomentMatrix build_M(const RandomWalk& walk, int m, int r, double rank_tol) {
  if (m < 0 || r < m + 1) fail(ErrorCode::InvalidArgument, "build_M needs r >= m + 1");
  MomentMatrix M;
  M.m = m;
  M.r = r;
  M.entries.resize(r, m + 1);
  for (int t = 1; t <= r; ++t) {
    for (int d = 0; d <= m; ++d) M.entries(t - 1, d) = walk.transition(t, d);
  }
  Eigen::JacobiSVD<Mat<double>> svd(M.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  M.rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rank_tol * smax) {
      inv(i) = 1.0 / s(i);
      ++M.rank;
    }
  }
  M.condition = s(s.size() - 1) > 0 ? smax / s(s.size() - 1) : INFINITY;
  M.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return M;
}

MomentMatrix choose_r(const RandomWalk& walk, int m, double rank_tol, int r_cap) {
  if (m < 0) fail(ErrorCode::InvalidArgument, "m must be >= 0");
  if (!(rank_tol > 0 && rank_tol < 1)) fail(ErrorCode::InvalidArgument, "rank_tol must lie in (0,1)");
  for (int r = m + 1; r <= r_cap; ++r) {
    MomentMatrix M = build_M(walk, m, r, rank_tol);
    if (M.rank == m + 1) return M;
  }
  fail(ErrorCode::RankNotReached, "no r <= " + std::to_string(r_cap) + " gives rank " +
                                      std::to_string(m + 1));
}

bool srw_submatrix_check(int m, const std::vector<int>& times) {
  if (m < 0 || static_cast<int>(times.size()) != m + 1) {
    fail(ErrorCode::InvalidArgument, "need exactly m + 1 times");
  }
  std::set<int> uniq(times.begin(), times.end());
  if (uniq.size() != times.size()) fail(ErrorCode::InvalidArgument, "times must be distinct");
  Mat<double> A(m + 1, m + 1);
  double scale = 1.0;
  for (int i = 0; i <= m; ++i) {
    const int t = times[i];
    if (t < 1) fail(ErrorCode::InvalidArgument, "times must be positive");
    for (int z = 0; z <= m; ++z) {
      A(i, z) = std::abs(z) <= t
                    ? boost::math::binomial_coefficient<double>(2 * t, t - z) / std::pow(4.0, t)
                    : 0.0;
    }
    scale *= A.row(i).norm();
  }
  const double det = A.fullPivLu().determinant();
  return std::abs(det) > 1e-14 * scale;
}

QTensor solve_Q(const MomentMatrix& M, int k, const PVector& p) {
  if (k < 1 || p.k != k || p.r != M.r || p.entries.size() != ipow(M.r, k)) {
    fail(ErrorCode::DimensionMismatch, "p vector does not match k and M.r");
  }
  QTensor Q;
  Q.k = k;
  Q.m = M.m;
  Q.entries = solve_modes<double>(M.pinv, k, p.entries);
  return Q;
}

}  // namespace sceneryscope
