#include "sceneryscope/scenery.hpp"

#include <charconv>
#include <functional>
#include <numeric>
#include <set>

namespace sceneryscope {

Alphabet Alphabet::coin() { return Alphabet{{"-1", "+1"}, {-1.0, 1.0}}; }

Alphabet Alphabet::of(std::vector<std::string> symbols) {
  Alphabet a;
  a.values.reserve(symbols.size());
  bool numeric = true;
  for (const auto& s : symbols) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) numeric = false;
      a.values.push_back(v);
    } catch (const std::exception&) {
      numeric = false;
    }
  }
  if (!numeric) {
    a.values.resize(symbols.size());
    std::iota(a.values.begin(), a.values.end(), 0.0);
  }
  a.symbols = std::move(symbols);
  if (a.symbols.empty()) fail(ErrorCode::InvalidArgument, "alphabet is empty");
  std::set<std::string> seen(a.symbols.begin(), a.symbols.end());
  if (seen.size() != a.symbols.size()) {
    fail(ErrorCode::InvalidArgument, "alphabet labels are not distinct");
  }
  return a;
}

int Alphabet::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] == label) return static_cast<int>(i);
  }
  return -1;
}

bool SiteLaw::approx_equal(const SiteLaw& other, double tol) const {
  if (probs.size() != other.probs.size()) return false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (std::abs(probs[i] - other.probs[i]) > tol) return false;
  }
  return true;
}

SiteLaw checked_law(std::vector<double> probs) {
  double total = 0;
  for (double p : probs) {
    if (!(p >= 0) || !std::isfinite(p)) {
      fail(ErrorCode::NotNormalized, "site law has a negative entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    fail(ErrorCode::NotNormalized, "site law does not sum to 1");
  }
  return SiteLaw{std::move(probs)};
}

Scenery::Scenery(Alphabet alphabet, SiteLaw alpha, std::map<long, SiteLaw> deviations)
    : alphabet_(std::move(alphabet)), alpha_(checked_law(std::move(alpha.probs))) {
  if (alpha_.probs.size() != alphabet_.size()) {
    fail(ErrorCode::AlphabetMismatch, "reference law size differs from alphabet");
  }
  for (auto& [z, law] : deviations) {
    SiteLaw l = checked_law(std::move(law.probs));
    if (l.probs.size() != alphabet_.size()) {
      fail(ErrorCode::AlphabetMismatch, "site law size differs from alphabet");
    }
    if (!l.approx_equal(alpha_)) deviations_.emplace(z, std::move(l));
  }
}

const SiteLaw& Scenery::law_at(long z) const {
  auto it = deviations_.find(z);
  return it == deviations_.end() ? alpha_ : it->second;
}

Scenery CoinScenery::to_scenery() const {
  std::map<long, SiteLaw> dev;
  for (const auto& [z, th] : theta) {
    if (!(th >= -1.0 && th <= 1.0)) fail(ErrorCode::InvalidArgument, "coin bias outside [-1,1]");
    dev.emplace(z, SiteLaw{{(1.0 - th) / 2.0, (1.0 + th) / 2.0}});
  }
  return Scenery(Alphabet::coin(), SiteLaw{{0.5, 0.5}}, std::move(dev));
}

double TestFunction::sup_norm() const {
  double s = 0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

TestFunction identity_function(const Alphabet& alphabet) {
  TestFunction f{"identity", alphabet.values};
  if (f.sup_norm() > 1.0) {
    double s = f.sup_norm();
    for (double& v : f.values) v /= s;
  }
  return f;
}

TestFunction indicator(const Alphabet& alphabet, std::size_t symbol) {
  if (symbol >= alphabet.size()) fail(ErrorCode::InvalidArgument, "symbol index out of range");
  TestFunction f{"1[" + alphabet.symbols[symbol] + "]",
                 std::vector<double>(alphabet.size(), 0.0)};
  f.values[symbol] = 1.0;
  return f;
}

std::vector<TestFunction> indicator_family(const Alphabet& alphabet, const SiteLaw& alpha) {
  std::vector<TestFunction> fam;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    fam.push_back(center(indicator(alphabet, i), alpha));
  }
  return fam;
}

TestFunction combine(const TestFunction& f, double a, const TestFunction& g, double b) {
  if (f.values.size() != g.values.size()) {
    fail(ErrorCode::AlphabetMismatch, "combining functions on different alphabets");
  }
  TestFunction h{f.name + "+" + std::to_string(b) + "*" + g.name, f.values};
  for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = a * f.values[i] + b * g.values[i];
  return h;
}

Bounds bounds(const Scenery& s) {
  if (s.empty()) fail(ErrorCode::EmptyScenery, "no deviating site");
  long a = s.deviations().begin()->first;
  long b = s.deviations().rbegin()->first;
  return {a, b, b - a};
}

double mean_of(const TestFunction& phi, const SiteLaw& law) {
  if (phi.values.size() != law.probs.size()) {
    fail(ErrorCode::AlphabetMismatch, "function and law use different alphabets");
  }
  double s = 0;
  for (std::size_t i = 0; i < phi.values.size(); ++i) s += phi.values[i] * law.probs[i];
  return s;
}

TestFunction center(const TestFunction& phi, const SiteLaw& alpha) {
  double m = mean_of(phi, alpha);
  TestFunction out{phi.name, phi.values};
  for (double& v : out.values) v -= m;
  return out;
}

bool is_centered(const TestFunction& phi, const SiteLaw& alpha, double tol) {
  return std::abs(mean_of(phi, alpha)) <= tol;
}

std::vector<double> site_means(const Scenery& s, const TestFunction& phi, long a, long b) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(b - a + 1));
  for (long z = a; z <= b; ++z) v.push_back(mean_of(phi, s.law_at(z)));
  return v;
}

namespace {

double enumerate(const std::map<long, double>& vals, const std::vector<int>& d) {
  double total = 0;
  std::function<void(long, std::size_t, double)> walk = [&](long z, std::size_t j, double acc) {
    if (j == d.size()) {
      total += acc;
      return;
    }
    auto step = [&](long next) {
      auto it = vals.find(next);
      if (it != vals.end()) walk(next, j + 1, acc * it->second);
    };
    step(z + d[j]);
    if (d[j] != 0) step(z - d[j]);
  };
  for (const auto& [z, v] : vals) walk(z, 0, v);
  return total;
}

}  // namespace

double brute_force_Q(const Scenery& s, const TestFunction& phi0, const std::vector<int>& d) {
  if (!is_centered(phi0, s.alpha())) {
    fail(ErrorCode::NotCentered, "test function has nonzero mean under alpha");
  }
  std::map<long, double> vals;
  for (const auto& [z, law] : s.deviations()) {
    double v = mean_of(phi0, law);
    if (v != 0.0) vals.emplace(z, v);
  }
  return enumerate(vals, d);
}

double brute_force_Q(const std::vector<double>& profile, const std::vector<int>& d) {
  std::map<long, double> vals;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (profile[i] != 0.0) vals.emplace(static_cast<long>(i), profile[i]);
  }
  return enumerate(vals, d);
}

Scenery shift(const Scenery& s, long j) {
  std::map<long, SiteLaw> dev;
  for (const auto& [z, law] : s.deviations()) dev.emplace(z + j, law);
  return Scenery(s.alphabet(), s.alpha(), std::move(dev));
}

Scenery reflect(const Scenery& s) {
  std::map<long, SiteLaw> dev;
  for (const auto& [z, law] : s.deviations()) dev.emplace(-z, law);
  return Scenery(s.alphabet(), s.alpha(), std::move(dev));
}

namespace {

template <class T, class Dist>
double aligned_distance(const std::vector<T>& x, const std::vector<T>& y, Dist dist) {
  if (x.size() != y.size()) return INFINITY;
  double fwd = 0, rev = 0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    fwd = std::max(fwd, dist(x[i], y[i]));
    rev = std::max(rev, dist(x[i], y[n - 1 - i]));
  }
  return std::min(fwd, rev);
}

}  // namespace

double bracket_distance(const std::vector<double>& x, const std::vector<double>& y) {
  return aligned_distance(x, y, [](double p, double q) { return std::abs(p - q); });
}

double bracket_distance(const std::vector<SiteLaw>& x, const std::vector<SiteLaw>& y) {
  return aligned_distance(x, y, [](const SiteLaw& p, const SiteLaw& q) {
    if (p.probs.size() != q.probs.size()) return double(INFINITY);
    double m = 0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) m = std::max(m, std::abs(p.probs[i] - q.probs[i]));
    return m;
  });
}

bool is_palindrome(const std::vector<double>& x, double tol) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    if (std::abs(x[i] - x[n - 1 - i]) > tol) return false;
  }
  return true;
}

}  // namespace sceneryscope
