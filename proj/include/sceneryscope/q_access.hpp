#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "sceneryscope/moments.hpp"
#include "sceneryscope/scenery.hpp"
#include "sceneryscope/tensor_algebra.hpp"

namespace sceneryscope {

/// Source of geometric moments Q^k_d(phi0). Values are memoised per
/// (function values, d) behind a mutex.
class QAccess {
 public:
  virtual ~QAccess() = default;

  double Q(const TestFunction& phi0, const std::vector<int>& d);
  /// Largest distance index the source can serve.
  virtual int max_distance() const = 0;
  std::size_t evaluations() const;

 protected:
  virtual double compute(const TestFunction& phi0, const std::vector<int>& d) = 0;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::vector<double>, std::vector<int>>, double> memo_;
};

/// Direct enumeration over the scenery; the oracle every other source is
/// checked against.
class GeometricQ : public QAccess {
 public:
  GeometricQ(Scenery s, int m) : s_(std::move(s)), m_(m) {}
  int max_distance() const override { return m_; }

 protected:
  double compute(const TestFunction& phi0, const std::vector<int>& d) override;

 private:
  Scenery s_;
  int m_;
};

/// exact p tensors -> left inverse of M, in 50-digit arithmetic. M is sized
/// for distances 0..m with r chosen by choose_r.
class MomentChainQ : public QAccess {
 public:
  MomentChainQ(const RandomWalk& walk, Scenery s, int m, double rank_tol = 1e-10,
               int r_cap = 128);
  ~MomentChainQ() override;

  int max_distance() const override { return m_; }
  const MomentMatrix& moment_matrix() const { return M_; }

 protected:
  double compute(const TestFunction& phi0, const std::vector<int>& d) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Scenery s_;
  int m_;
  MomentMatrix M_;
};

/// Estimated Q from an observation prefix: pinv rows are contracted into the
/// per-start products before block averaging, which equals solve_Q applied
/// to the estimated p tensor.
class EstimatedQ : public QAccess {
 public:
  EstimatedQ(const RandomWalk& walk, std::span<const Symbol> obs, long N, int m,
             double rank_tol = 1e-10, int r_cap = 128);

  int max_distance() const override { return M_.m; }
  const MomentMatrix& moment_matrix() const { return M_; }

 protected:
  double compute(const TestFunction& phi0, const std::vector<int>& d) override;

 private:
  const RandomWalk& walk_;
  std::span<const Symbol> obs_;
  long N_;
  MomentMatrix M_;
};

}  // namespace sceneryscope
