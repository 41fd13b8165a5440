#include "sceneryscope/q_access.hpp"

#include "sceneryscope/multiprecision.hpp"

namespace sceneryscope {

double QAccess::Q(const TestFunction& phi0, const std::vector<int>& d) {
  if (d.empty()) fail(ErrorCode::InvalidArgument, "empty distance tuple");
  for (int dj : d) {
    if (dj < 0 || dj > max_distance()) {
      fail(ErrorCode::DimensionMismatch, "distance " + std::to_string(dj) + " outside 0.." +
                                             std::to_string(max_distance()));
    }
  }
  auto key = std::make_pair(phi0.values, d);
  {
    std::lock_guard lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  double v = compute(phi0, d);
  std::lock_guard lock(mu_);
  memo_.emplace(std::move(key), v);
  return v;
}

std::size_t QAccess::evaluations() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

double GeometricQ::compute(const TestFunction& phi0, const std::vector<int>& d) {
  return brute_force_Q(s_, phi0, d);
}

struct MomentChainQ::Impl {
  using Key = std::pair<std::vector<double>, int>;

  int window = 0;
  int r = 0;
  std::vector<Mat<ExactReal>> T;
  Mat<ExactReal> pinv;
  std::mutex mu;
  std::map<Key, std::shared_ptr<const std::vector<ExactReal>>> p_cache;
  std::map<Key, std::shared_ptr<const std::vector<ExactReal>>> q_cache;
  std::size_t cached_bytes = 0;
  static constexpr std::size_t kBudget = std::size_t(512) << 20;

  std::shared_ptr<const std::vector<ExactReal>> p_tensor(const std::vector<double>& prof, int k) {
    Key key{prof, k};
    {
      std::lock_guard lock(mu);
      auto it = p_cache.find(key);
      if (it != p_cache.end()) return it->second;
    }
    Vec<ExactReal> v(window);
    for (int i = 0; i < window; ++i) v(i) = ExactReal(prof[i]);
    auto p = std::make_shared<const std::vector<ExactReal>>(exact_p_window_tensor(T, v, k, r));
    const std::size_t bytes = p->size() * sizeof(ExactReal);
    std::lock_guard lock(mu);
    if (cached_bytes + bytes > kBudget) {
      p_cache.clear();
      cached_bytes = 0;
    }
    if (bytes <= kBudget) {
      p_cache.emplace(key, p);
      cached_bytes += bytes;
    }
    return p;
  }
};

MomentChainQ::MomentChainQ(const RandomWalk& walk, Scenery s, int m, double rank_tol, int r_cap)
    : impl_(std::make_unique<Impl>()), s_(std::move(s)), m_(m) {
  M_ = choose_r(walk, m, rank_tol, r_cap);
  const int r = M_.r;
  impl_->r = r;
  std::vector<TransitionRowT<ExactReal>> rows;
  rows.push_back(step_distribution_as<ExactReal>(walk.law(), 0));
  for (int t = 1; t <= r; ++t) rows.push_back(convolve_step(rows.back(), walk.law()));
  Mat<ExactReal> Mx(r, m + 1);
  for (int t = 1; t <= r; ++t) {
    for (int d = 0; d <= m; ++d) Mx(t - 1, d) = rows[t].at(d);
  }
  Mat<ExactReal> I = Mat<ExactReal>::Identity(r, r);
  impl_->pinv = Mx.colPivHouseholderQr().solve(I);
  if (!s_.empty()) {
    Bounds bd = bounds(s_);
    impl_->window = static_cast<int>(bd.ell + 1);
    impl_->T = window_transitions(rows, impl_->window);
  }
}

MomentChainQ::~MomentChainQ() = default;

double MomentChainQ::compute(const TestFunction& phi0, const std::vector<int>& d) {
  if (!is_centered(phi0, s_.alpha())) {
    fail(ErrorCode::NotCentered, "test function has nonzero mean under alpha");
  }
  if (s_.empty()) return 0.0;
  const std::vector<double> prof = centered_profile(s_, phi0);
  const int k = static_cast<int>(d.size());
  auto p = impl_->p_tensor(prof, k);
  if (k > 3) return to_double(solve_entry<ExactReal>(impl_->pinv, *p, d));
  Impl::Key key{prof, k};
  std::shared_ptr<const std::vector<ExactReal>> q;
  {
    std::lock_guard lock(impl_->mu);
    auto it = impl_->q_cache.find(key);
    if (it != impl_->q_cache.end()) q = it->second;
  }
  if (!q) {
    q = std::make_shared<const std::vector<ExactReal>>(solve_modes<ExactReal>(impl_->pinv, k, *p));
    std::lock_guard lock(impl_->mu);
    impl_->q_cache.emplace(key, q);
  }
  return to_double((*q)[flat_index(d, m_ + 1, 0)]);
}

EstimatedQ::EstimatedQ(const RandomWalk& walk, std::span<const Symbol> obs, long N, int m,
                       double rank_tol, int r_cap)
    : walk_(walk), obs_(obs), N_(N) {
  if (N < 1 || static_cast<long>(obs.size()) < N) {
    fail(ErrorCode::InsufficientObservations,
         "need " + std::to_string(N) + " observations, have " + std::to_string(obs.size()));
  }
  M_ = choose_r(walk, m, rank_tol, r_cap);
}

double EstimatedQ::compute(const TestFunction& phi0, const std::vector<int>& d) {
  const int k = static_cast<int>(d.size());
  const int r = M_.r;
  BlockSchedule sched;
  try {
    sched = make_schedule(walk_, N_ - 1 - static_cast<long>(k) * r);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HorizonTooSmall) throw;
    fail(ErrorCode::InsufficientObservations, "no complete block for order " + std::to_string(k));
  }
  const auto& f = phi0.values;
  auto phi_at = [&](long i) {
    Symbol x = obs_[static_cast<std::size_t>(i)];
    if (x >= f.size()) fail(ErrorCode::AlphabetMismatch, "symbol outside the alphabet");
    return f[x];
  };
  double total = 0;
  for (const Block& b : sched.blocks) {
    const long lo = b.m + 1;
    long hi = b.n + static_cast<long>(k) * r;
    std::vector<double> G(static_cast<std::size_t>(hi - lo + 1));
    for (long i = lo; i <= hi; ++i) G[i - lo] = phi_at(i);
    for (int j = k; j >= 1; --j) {
      const long top = b.n + static_cast<long>(j - 1) * r;
      std::vector<double> next(static_cast<std::size_t>(top - lo + 1));
      for (long i = lo; i <= top; ++i) {
        double acc = 0;
        for (int t = 1; t <= r; ++t) acc += M_.pinv(d[j - 1], t - 1) * G[i + t - lo];
        next[i - lo] = phi_at(i) * acc;
      }
      G = std::move(next);
      hi = top;
    }
    double acc = 0;
    for (long s = lo; s <= b.n; ++s) acc += walk_.return_probability(s) * G[s - lo];
    total += acc / walk_.weight(b.m, b.n);
  }
  return total / static_cast<double>(sched.blocks.size());
}

}  // namespace sceneryscope
