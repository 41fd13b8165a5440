#include "sceneryscope/moments.hpp"

#include <numeric>

namespace sceneryscope {

namespace {

long gap_sum(const TVector& t) {
  long s = 0;
  for (int g : t) {
    if (g < 1) fail(ErrorCode::InvalidArgument, "time gaps must be positive");
    s += g;
  }
  return s;
}

std::vector<TransitionRow> rows_upto(const RandomWalk& walk, int tmax) {
  std::vector<TransitionRow> rows;
  rows.reserve(static_cast<std::size_t>(tmax) + 1);
  for (int t = 0; t <= tmax; ++t) rows.push_back(walk.row(t));
  return rows;
}

}  // namespace

std::vector<double> centered_profile(const Scenery& s, const TestFunction& phi, long* a) {
  if (!is_centered(phi, s.alpha())) {
    fail(ErrorCode::NotCentered, "test function has nonzero mean under alpha");
  }
  Bounds bd = bounds(s);
  if (a) *a = bd.a;
  return site_means(s, phi, bd.a, bd.b);
}

double exact_p(const RandomWalk& walk, const Scenery& s, const TestFunction& phi, const TVector& t) {
  if (t.empty()) fail(ErrorCode::InvalidArgument, "empty time vector");
  gap_sum(t);
  if (!is_centered(phi, s.alpha())) {
    fail(ErrorCode::NotCentered, "test function has nonzero mean under alpha");
  }
  if (s.empty()) return 0.0;
  std::vector<double> prof = centered_profile(s, phi);
  const int n = static_cast<int>(prof.size());
  int tmax = *std::max_element(t.begin(), t.end());
  auto T = window_transitions(rows_upto(walk, tmax), n);
  Vec<double> v = Eigen::Map<Vec<double>>(prof.data(), n);
  return exact_p_window(T, v, t);
}

PVector exact_p_vector(const RandomWalk& walk, const Scenery& s, const TestFunction& phi, int k, int r) {
  if (k < 1 || r < 1) fail(ErrorCode::InvalidArgument, "k and r must be positive");
  if (!is_centered(phi, s.alpha())) {
    fail(ErrorCode::NotCentered, "test function has nonzero mean under alpha");
  }
  PVector p{k, r, std::vector<double>(ipow(r, k), 0.0)};
  if (s.empty()) return p;
  std::vector<double> prof = centered_profile(s, phi);
  const int n = static_cast<int>(prof.size());
  auto T = window_transitions(rows_upto(walk, r), n);
  Vec<double> v = Eigen::Map<Vec<double>>(prof.data(), n);
  p.entries = exact_p_window_tensor(T, v, k, r);
  return p;
}

double exact_block_mean(const RandomWalk& walk, const Scenery& s, const TestFunction& phi,
                        const TVector& t, long m, long n) {
  if (t.empty()) fail(ErrorCode::InvalidArgument, "empty time vector");
  if (!(0 <= m && m < n)) fail(ErrorCode::InvalidArgument, "block needs 0 <= m < n");
  if (n > walk.exact_limit()) fail(ErrorCode::InvalidArgument, "block end beyond exact range");
  const long R = walk.law().radius();
  const long reach = (n + gap_sum(t)) * R;
  long lo = -reach, hi = reach;
  if (!s.empty()) {
    Bounds bd = bounds(s);
    lo = std::min(lo, bd.a);
    hi = std::max(hi, bd.b);
  }
  const int width = static_cast<int>(hi - lo + 1);
  std::vector<double> prof = site_means(s, phi, lo, hi);
  Vec<double> v = Eigen::Map<Vec<double>>(prof.data(), width);
  // h_1(z) = E_z[phi(X_0) phi(X_{t_1}) ...], applied with banded rows.
  auto apply = [&](const TransitionRow& row, const Vec<double>& h) {
    Vec<double> out = Vec<double>::Zero(width);
    for (int i = 0; i < width; ++i) {
      double acc = 0;
      for (int d = -row.half_width; d <= row.half_width; ++d) {
        int j = i + d;
        if (j >= 0 && j < width) acc += row.at(d) * h(j);
      }
      out(i) = acc;
    }
    return out;
  };
  Vec<double> h = v;
  for (std::size_t j = t.size(); j-- > 0;) h = v.cwiseProduct(apply(walk.row(t[j]), h));
  double num = 0;
  for (long k = m + 1; k <= n; ++k) {
    const TransitionRow& row = walk.row(static_cast<int>(k));
    double e = 0;
    for (int d = -row.half_width; d <= row.half_width; ++d) e += row.at(d) * h(d - lo);
    num += walk.return_probability(k) * e;
  }
  return num / walk.weight(m, n);
}

BlockEstimator::BlockEstimator(const RandomWalk& walk, const TestFunction& phi, TVector t, long m,
                               long n)
    : walk_(walk), phi_(phi.values), t_(std::move(t)), m_(m), n_(n) {
  if (t_.empty()) fail(ErrorCode::InvalidArgument, "empty time vector");
  if (!(0 <= m && m < n)) fail(ErrorCode::InvalidArgument, "block needs 0 <= m < n");
  span_ = gap_sum(t_);
  ring_.assign(static_cast<std::size_t>(span_) + 1, 0.0);
  next_index_ = m_ + 1;
}

void BlockEstimator::push(Symbol x) {
  if (done()) return;
  if (x >= phi_.size()) fail(ErrorCode::AlphabetMismatch, "symbol outside the alphabet");
  const long i = next_index_++;
  const std::size_t depth = ring_.size();
  ring_[static_cast<std::size_t>(i) % depth] = phi_[x];
  const long k = i - span_;
  if (k <= m_) return;
  double z = ring_[static_cast<std::size_t>(k) % depth];
  long pos = k;
  for (int g : t_) {
    pos += g;
    z *= ring_[static_cast<std::size_t>(pos) % depth];
  }
  acc_ += walk_.return_probability(k) * z;
}

double BlockEstimator::value() const {
  if (!done()) fail(ErrorCode::InsufficientObservations, "block not complete");
  return acc_ / walk_.weight(m_, n_);
}

double block_estimate(std::span<const Symbol> obs, const RandomWalk& walk, const TestFunction& phi,
                      const TVector& t, long m, long n) {
  BlockEstimator est(walk, phi, t, m, n);
  if (static_cast<long>(obs.size()) < est.needed()) {
    fail(ErrorCode::InsufficientObservations,
         "block needs " + std::to_string(est.needed()) + " observations, have " +
             std::to_string(obs.size()));
  }
  for (long i = m + 1; !est.done(); ++i) est.push(obs[static_cast<std::size_t>(i)]);
  return est.value();
}

BlockSchedule make_schedule(const RandomWalk& walk, long N) {
  if (N < 16) fail(ErrorCode::HorizonTooSmall, "horizon must be at least 16");
  BlockSchedule sched;
  long m = 1;
  while (m < N) {
    const double target = walk.weight(0, m);
    double acc = 0;
    long n = m;
    while (acc < target && n < N) {
      ++n;
      double u = walk.return_probability(n);
      acc += u * u;
    }
    if (acc < target) break;
    sched.blocks.push_back({m, n});
    m = 4 * n;
  }
  if (sched.blocks.empty()) fail(ErrorCode::HorizonTooSmall, "no complete block fits the horizon");
  return sched;
}

std::vector<double> block_values(std::span<const Symbol> obs, const RandomWalk& walk,
                                 const TestFunction& phi, const TVector& t, long N) {
  if (t.empty()) fail(ErrorCode::InvalidArgument, "empty time vector");
  if (N < 1 || static_cast<long>(obs.size()) < N) {
    fail(ErrorCode::InsufficientObservations,
         "need " + std::to_string(N) + " observations, have " + std::to_string(obs.size()));
  }
  const long horizon = N - 1 - gap_sum(t);
  BlockSchedule sched;
  try {
    sched = make_schedule(walk, horizon);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HorizonTooSmall) throw;
    fail(ErrorCode::InsufficientObservations, "no complete block within " + std::to_string(N) +
                                                  " observations");
  }
  std::vector<double> vals;
  for (const Block& b : sched.blocks) {
    vals.push_back(block_estimate(obs.first(static_cast<std::size_t>(N)), walk, phi, t, b.m, b.n));
  }
  return vals;
}

double estimate_p(std::span<const Symbol> obs, const RandomWalk& walk, const TestFunction& phi,
                  const TVector& t, long N) {
  std::vector<double> vals = block_values(obs, walk, phi, t, N);
  return std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
}

PVector estimate_p_vector(std::span<const Symbol> obs, const RandomWalk& walk,
                          const TestFunction& phi, int k, int r, long N) {
  PVector p{k, r, std::vector<double>(ipow(r, k), 0.0)};
  for (std::size_t f = 0; f < p.entries.size(); ++f) {
    p.entries[f] = estimate_p(obs, walk, phi, unflatten(f, k, r, 1), N);
  }
  return p;
}

int estimate_ell(const P1Access& p1, std::size_t family_size, const RandomWalk& walk, int m_max,
                 double tau, EllScan* scan) {
  return estimate_ell(p1, family_size, walk, m_max, [tau](int, std::size_t) { return tau; }, scan);
}

int estimate_ell(const P1Access& p1, std::size_t family_size, const RandomWalk& walk, int m_max,
                 const TauFn& tau, EllScan* scan) {
  if (m_max < 0) fail(ErrorCode::InvalidArgument, "m_max must be >= 0");
  if (scan) scan->T.assign(static_cast<std::size_t>(m_max) + 1, std::vector<double>(family_size, 0.0));
  int found = -1;
  for (int m = m_max; m >= 0 && found < 0; --m) {
    MomentMatrix M = choose_r(walk, m);
    for (std::size_t h = 0; h < family_size; ++h) {
      PVector p = p1(h, M.r);
      if (p.k != 1 || p.r != M.r) fail(ErrorCode::DimensionMismatch, "p1 access returned wrong shape");
      double T = 0;
      for (int t = 0; t < M.r; ++t) T += M.pinv(m, t) * p.entries[t];
      if (scan) scan->T[m][h] = T;
      if (std::abs(T) > tau(m, h)) found = m;
    }
  }
  if (scan) scan->ell = found;
  if (found < 0) fail(ErrorCode::NoSignal, "no T(m, h) above threshold for m <= " + std::to_string(m_max));
  return found;
}

}  // namespace sceneryscope
