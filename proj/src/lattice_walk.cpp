#include "sceneryscope/lattice_walk.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

namespace sceneryscope {

int IncrementLaw::radius() const {
  int r = 0;
  for (const auto& [z, p] : support_probs) {
    if (p > 0) r = std::max(r, std::abs(z));
  }
  return r;
}

double IncrementLaw::prob(int z) const {
  auto it = support_probs.find(z);
  return it == support_probs.end() ? 0.0 : it->second;
}

double IncrementLaw::variance() const {
  double v = 0;
  for (const auto& [z, p] : support_probs) v += p * z * z;
  return v;
}

ValidationResult check_law(const std::map<int, double>& raw) {
  ValidationResult res;
  if (raw.empty()) {
    res.violations.push_back({ErrorCode::NotNormalized, "sum q(z) = 1",
                              "increment law is empty"});
    return res;
  }
  double total = 0;
  bool negative = false;
  for (const auto& [z, p] : raw) {
    if (!(p >= 0) || !std::isfinite(p)) negative = true;
    total += p;
  }
  if (negative) {
    res.violations.push_back({ErrorCode::NotNormalized, "q(z) >= 0",
                              "negative or non-finite probability"});
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total;
    res.violations.push_back({ErrorCode::NotNormalized, "sum q(z) = 1", os.str()});
  }
  for (const auto& [z, p] : raw) {
    auto it = raw.find(-z);
    double mirror = it == raw.end() ? 0.0 : it->second;
    if (std::abs(p - mirror) > 1e-12) {
      std::ostringstream os;
      os << "q(" << z << ") != q(" << -z << ")";
      res.violations.push_back({ErrorCode::Asymmetric, "q(z) = q(-z)", os.str()});
      break;
    }
  }
  if (!negative) {
    IncrementLaw q{raw};
    const int R = q.radius();
    const int horizon = 2 * R + 2;
    int g = 0;
    TransitionRow row;
    row.probs = {1.0};
    for (int n = 1; n <= horizon; ++n) {
      row = convolve_step(row, q);
      if (row.at(0) > 0) g = std::gcd(g, n);
    }
    if (g != 1) {
      std::ostringstream os;
      os << "return times have gcd " << g;
      res.violations.push_back(
          {ErrorCode::Periodic, "gcd{n : q^{*n}(0) > 0} = 1", os.str()});
    }
  }
  if (res.violations.empty()) res.law = IncrementLaw{raw};
  return res;
}

IncrementLaw validate(const std::map<int, double>& raw) {
  ValidationResult res = check_law(raw);
  if (res.ok()) return *res.law;
  std::string msg;
  for (const auto& v : res.violations) {
    if (!msg.empty()) msg += "; ";
    msg += std::string(to_string(v.code)) + " (" + v.condition + "): " + v.message;
  }
  throw Error(res.violations.front().code, msg);
}

TransitionRow step_distribution(const IncrementLaw& q, int t) {
  return step_distribution_as<double>(q, t);
}

namespace {

constexpr double kLogCutoff = -40.0;
constexpr int kGrid = 1 << 16;

double psi(const IncrementLaw& q, double theta) {
  double s = 0;
  for (const auto& [z, p] : q.support_probs) s += p * std::cos(z * theta);
  return s;
}

struct FourierNodes {
  std::vector<double> theta;
  std::vector<double> weight;
  std::vector<double> psi;
};

// Nodes resolving (1/pi) int_0^pi psi^n cos(d x) dx for n in [n0, 2 n0].
FourierNodes plan_nodes(const IncrementLaw& q, double sigma2, long n0) {
  using Gauss = boost::math::quadrature::gauss<double, 15>;
  const double pi = boost::math::constants::pi<double>();
  const double step = pi / kGrid;
  std::vector<std::pair<double, double>> intervals;
  int start = -1;
  for (int i = 0; i <= kGrid; ++i) {
    double lp = std::log(std::abs(psi(q, i * step)));
    bool keep = static_cast<double>(n0) * lp > kLogCutoff;
    if (keep && start < 0) start = i;
    if ((!keep || i == kGrid) && start >= 0) {
      int stop = keep ? i : i - 1;
      intervals.emplace_back(std::max(0.0, (start - 1) * step),
                             std::min(pi, (stop + 1) * step));
      start = -1;
    }
  }
  const double core = std::sqrt(-2.0 * kLogCutoff / (n0 * sigma2)) * 1.5;
  if (intervals.empty() || intervals.front().first > 0.0) {
    intervals.insert(intervals.begin(), {0.0, std::min(pi, core)});
  } else {
    intervals.front().second = std::max(intervals.front().second, std::min(pi, core));
  }
  const double width = 0.5 / std::sqrt(n0 * sigma2);
  FourierNodes nodes;
  const auto& xs = Gauss::abscissa();
  const auto& ws = Gauss::weights();
  for (const auto& [lo, hi] : intervals) {
    int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
    double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      double mid = lo + (p + 0.5) * h;
      double half = 0.5 * h;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        for (int sgn : {1, -1}) {
          if (sgn < 0 && xs[k] == 0.0) continue;
          double th = mid + sgn * half * xs[k];
          nodes.theta.push_back(th);
          nodes.weight.push_back(ws[k] * half / pi);
          nodes.psi.push_back(psi(q, th));
        }
      }
    }
  }
  return nodes;
}

}  // namespace

RandomWalk::RandomWalk(IncrementLaw q, int exact_limit)
    : q_(std::move(q)), exact_limit_(exact_limit), sigma2_(q_.variance()) {
  if (exact_limit_ < 1) fail(ErrorCode::InvalidArgument, "exact_limit must be >= 1");
  TransitionRow r0;
  r0.probs = {1.0};
  rows_.push_back(std::move(r0));
  u_ = {1.0};
  w_ = {0.0};
}

void RandomWalk::extend_rows(int t) const {
  while (static_cast<int>(rows_.size()) <= t) {
    rows_.push_back(convolve_step(rows_.back(), q_));
  }
}

const TransitionRow& RandomWalk::row(int t) const {
  if (t < 0 || t > exact_limit_) {
    fail(ErrorCode::InvalidArgument, "row index outside exact range");
  }
  {
    std::shared_lock lock(mu_);
    if (t < static_cast<int>(rows_.size())) return rows_[t];
  }
  std::unique_lock lock(mu_);
  extend_rows(t);
  return rows_[t];
}

double RandomWalk::transition_fourier(long t, long d) const {
  if (t == 0) return d == 0 ? 1.0 : 0.0;
  if (sigma2_ == 0.0) return d == 0 ? 1.0 : 0.0;
  FourierNodes nodes = plan_nodes(q_, sigma2_, t);
  double s = 0;
  for (std::size_t i = 0; i < nodes.theta.size(); ++i) {
    s += nodes.weight[i] * std::pow(nodes.psi[i], static_cast<double>(t)) *
         std::cos(static_cast<double>(d) * nodes.theta[i]);
  }
  return s;
}

double RandomWalk::transition(long t, long d) const {
  if (t < 0) fail(ErrorCode::InvalidArgument, "step count must be >= 0");
  if (t <= exact_limit_) return row(static_cast<int>(t)).at(d);
  if (std::abs(d) > t * static_cast<long>(q_.radius())) return 0.0;
  return transition_fourier(t, d);
}

void RandomWalk::extend_returns(long n) const {
  long k = static_cast<long>(u_.size());
  n = std::max(n, 2 * k);
  auto push = [&](double u) {
    u_.push_back(u);
    w_.push_back(w_.back() + u * u);
  };
  for (; k <= n && k <= exact_limit_; ++k) {
    extend_rows(static_cast<int>(k));
    push(rows_[k].at(0));
  }
  while (k <= n) {
    if (sigma2_ == 0.0) {
      push(1.0);
      ++k;
      continue;
    }
    // one node plan per block [L 2^j, L 2^{j+1})
    long anchor = exact_limit_ + 1;
    while (2 * anchor <= k) anchor *= 2;
    FourierNodes nodes = plan_nodes(q_, sigma2_, anchor);
    std::vector<double> pw(nodes.theta.size());
    for (std::size_t i = 0; i < pw.size(); ++i) {
      pw[i] = std::pow(nodes.psi[i], static_cast<double>(k));
    }
    for (; k <= n && k < 2 * anchor; ++k) {
      double s = 0;
      for (std::size_t i = 0; i < pw.size(); ++i) {
        s += nodes.weight[i] * pw[i];
        pw[i] *= nodes.psi[i];
      }
      push(s);
    }
  }
}

double RandomWalk::return_probability(long n) const {
  if (n < 0) fail(ErrorCode::InvalidArgument, "step count must be >= 0");
  {
    std::shared_lock lock(mu_);
    if (n < static_cast<long>(u_.size())) return u_[n];
  }
  std::unique_lock lock(mu_);
  extend_returns(n);
  return u_[n];
}

double RandomWalk::weight(long m, long n) const {
  if (m < 0 || n < m) fail(ErrorCode::InvalidArgument, "weight needs 0 <= m <= n");
  if (m == n) return 0.0;
  return_probability(n);
  std::shared_lock lock(mu_);
  return w_[n] - w_[m];
}

}  // namespace sceneryscope
