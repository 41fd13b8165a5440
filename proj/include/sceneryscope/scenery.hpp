#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sceneryscope/error.hpp"

namespace sceneryscope {

struct Alphabet {
  std::vector<std::string> symbols;
  std::vector<double> values;

  static Alphabet coin();
  static Alphabet of(std::vector<std::string> symbols);

  std::size_t size() const { return symbols.size(); }
  int index_of(const std::string& label) const;
  bool operator==(const Alphabet&) const = default;
};

struct SiteLaw {
  std::vector<double> probs;

  bool approx_equal(const SiteLaw& other, double tol = 1e-10) const;
  bool operator==(const SiteLaw&) const = default;
};

SiteLaw checked_law(std::vector<double> probs);

class Scenery {
 public:
  Scenery(Alphabet alphabet, SiteLaw alpha, std::map<long, SiteLaw> deviations = {});

  const Alphabet& alphabet() const { return alphabet_; }
  const SiteLaw& alpha() const { return alpha_; }
  const std::map<long, SiteLaw>& deviations() const { return deviations_; }
  const SiteLaw& law_at(long z) const;
  bool empty() const { return deviations_.empty(); }

 private:
  Alphabet alphabet_;
  SiteLaw alpha_;
  std::map<long, SiteLaw> deviations_;
};

/// Bias map theta; a coin with bias b shows +1 with probability (1 + b) / 2.
struct CoinScenery {
  std::map<long, double> theta;

  Scenery to_scenery() const;
};

struct TestFunction {
  std::string name;
  std::vector<double> values;

  double sup_norm() const;
};

TestFunction identity_function(const Alphabet& alphabet);
TestFunction indicator(const Alphabet& alphabet, std::size_t symbol);
/// Centred indicators of every symbol, in alphabet order.
std::vector<TestFunction> indicator_family(const Alphabet& alphabet, const SiteLaw& alpha);
/// a * f + b * g, renamed.
TestFunction combine(const TestFunction& f, double a, const TestFunction& g, double b);

struct Bounds {
  long a;
  long b;
  long ell;
};

Bounds bounds(const Scenery& s);

double mean_of(const TestFunction& phi, const SiteLaw& law);
TestFunction center(const TestFunction& phi, const SiteLaw& alpha);
bool is_centered(const TestFunction& phi, const SiteLaw& alpha, double tol = 1e-10);

/// Means of phi at sites a..b (inclusive).
std::vector<double> site_means(const Scenery& s, const TestFunction& phi, long a, long b);

double brute_force_Q(const Scenery& s, const TestFunction& phi0, const std::vector<int>& d);
/// Same enumeration over a value profile on consecutive sites 0..n-1.
double brute_force_Q(const std::vector<double>& profile, const std::vector<int>& d);

Scenery shift(const Scenery& s, long j);
Scenery reflect(const Scenery& s);

template <class T>
struct BracketSequence {
  std::vector<T> canonical;

  std::size_t size() const { return canonical.size(); }
  bool operator==(const BracketSequence&) const = default;
};

inline bool lex_less(const std::vector<double>& x, const std::vector<double>& y) {
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

inline bool lex_less(const std::vector<SiteLaw>& x, const std::vector<SiteLaw>& y) {
  return std::lexicographical_compare(
      x.begin(), x.end(), y.begin(), y.end(),
      [](const SiteLaw& l, const SiteLaw& r) { return l.probs < r.probs; });
}

template <class T>
BracketSequence<T> canonical_bracket(const std::vector<T>& seq) {
  std::vector<T> rev(seq.rbegin(), seq.rend());
  if (lex_less(rev, seq)) return {rev};
  return {seq};
}

/// min over the two alignments of the max entrywise distance.
double bracket_distance(const std::vector<double>& x, const std::vector<double>& y);
double bracket_distance(const std::vector<SiteLaw>& x, const std::vector<SiteLaw>& y);
bool is_palindrome(const std::vector<double>& x, double tol);

}  // namespace sceneryscope
