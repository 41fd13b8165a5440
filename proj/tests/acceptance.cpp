// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sceneryscope/q_access.hpp"
#include "sceneryscope/reconstruct.hpp"

using namespace sceneryscope;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

IncrementLaw lazy() { return validate({{0, 0.5}, {1, 0.25}, {-1, 0.25}}); }

const RandomWalk& lazy_walk() {
  static RandomWalk walk(lazy());
  return walk;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

struct CoinCase {
  std::vector<double> theta;
  Scenery scenery;
};

std::vector<CoinCase> coin_cases() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> width(0, 6), tenth(1, 9);
  std::uniform_int_distribution<long> offset(-20, 20);
  std::vector<CoinCase> out;
  for (int i = 0; i < 50; ++i) {
    // widths 0..6 cycle first so every width is covered
    const int ell = i < 7 ? i : width(rng);
    const long a = offset(rng);
    std::vector<double> theta(ell + 1);
    std::map<long, double> m;
    for (int j = 0; j <= ell; ++j) {
      theta[j] = tenth(rng) / 10.0;
      m[a + j] = theta[j];
    }
    out.push_back({theta, CoinScenery{m}.to_scenery()});
  }
  return out;
}

SiteLaw random_law(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(2.0, 1.0);
  std::vector<double> p(3);
  for (double& x : p) x = g(rng) + 0.05;
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
  return SiteLaw{p};
}

SiteLaw law_with_first(std::mt19937_64& rng, double p0) {
  std::uniform_real_distribution<double> u(0.15, 0.85);
  const double split = u(rng);
  return SiteLaw{{p0, (1 - p0) * split, (1 - p0) * (1 - split)}};
}

double law_gap(const SiteLaw& x, const SiteLaw& y) {
  double d = 0;
  for (std::size_t i = 0; i < x.probs.size(); ++i) d = std::max(d, std::abs(x.probs[i] - y.probs[i]));
  return d;
}

struct GeneralCase {
  Scenery scenery;
  std::vector<SiteLaw> truth;
  bool forced_aux;
};

std::vector<GeneralCase> general_cases() {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> width(0, 4);
  Alphabet ab = Alphabet::of({"x", "y", "z"});
  SiteLaw alpha{{0.3, 0.3, 0.4}};
  std::vector<GeneralCase> out;
  for (int i = 0; i < 20; ++i) {
    const bool forced = i < 6;
    const int ell = forced ? 1 + i % 4 : width(rng);
    std::vector<SiteLaw> laws(ell + 1);
    for (;;) {
      for (int j = 0; j <= ell; ++j) laws[j] = random_law(rng);
      if (forced) laws[0] = law_with_first(rng, alpha.probs[0]);
      bool ok = law_gap(laws[0], alpha) > 0.05 && law_gap(laws[ell], alpha) > 0.05;
      if (ell > 0) ok = ok && law_gap(laws[0], laws[ell]) > 0.05;
      if (forced) ok = ok && std::abs(laws[ell].probs[0] - alpha.probs[0]) > 0.05;
      if (ok) break;
    }
    std::map<long, SiteLaw> dev;
    for (int j = 0; j <= ell; ++j) dev[j] = laws[j];
    out.push_back({Scenery(ab, alpha, dev), laws, forced});
  }
  return out;
}

Outcome criterion1() {
  auto t0 = Clock::now();
  double worst = 0;
  int failures = 0;
  for (const CoinCase& c : coin_cases()) {
    const int ell = static_cast<int>(c.theta.size()) - 1;
    MomentChainQ Q(lazy_walk(), c.scenery, ell);
    TestFunction phi = identity_function(c.scenery.alphabet());
    double err;
    try {
      err = bracket_distance(recover_profile(Q, phi, ell).canonical, c.theta);
    } catch (const Error&) {
      err = INFINITY;
    }
    worst = std::max(worst, err);
    if (!(err < 1e-7)) ++failures;
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 60,
          "50 coin sceneries, max error " + fmt("%.2e", worst) + ", " + std::to_string(failures) +
              " failures, " + fmt("%.1f", secs) + " s"};
}

Outcome criterion2() {
  auto t0 = Clock::now();
  double worst = 0;
  int failures = 0, forced = 0;
  for (const GeneralCase& c : general_cases()) {
    const int ell = static_cast<int>(c.truth.size()) - 1;
    std::vector<TestFunction> fam = indicator_family(c.scenery.alphabet(), c.scenery.alpha());
    if (c.forced_aux && std::abs(mean_of(fam[0], c.truth[0])) < 1e-12) ++forced;
    MomentChainQ Q(lazy_walk(), c.scenery, ell);
    double err;
    try {
      err = bracket_distance(merge_profiles(Q, fam, c.scenery.alpha(), ell).canonical, c.truth);
    } catch (const Error&) {
      err = INFINITY;
    }
    worst = std::max(worst, err);
    if (!(err < 1e-6)) ++failures;
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && forced >= 5 && secs < 120,
          "20 three-symbol sceneries (" + std::to_string(forced) + " through the auxiliary branch), max error " +
              fmt("%.2e", worst) + ", " + std::to_string(failures) + " failures, " + fmt("%.1f", secs) + " s"};
}

Outcome criterion3() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> bias(-0.9, 0.9);
  std::uniform_int_distribution<int> width(0, 4);
  const RandomWalk& walk = lazy_walk();
  double worst_ratio = 0;
  int bad = 0;
  for (int i = 0; i < 20; ++i) {
    const int ell = i < 5 ? i : width(rng);
    std::map<long, double> theta;
    for (int j = 0; j <= ell; ++j) theta[j] = bias(rng);
    Scenery s = CoinScenery{theta}.to_scenery();
    TestFunction phi = identity_function(s.alphabet());
    MomentMatrix M = choose_r(walk, ell);
    for (int k = 1; k <= 3; ++k) {
      QTensor Q = solve_Q(M, k, exact_p_vector(walk, s, phi, k, M.r));
      const double tol = 1e-8 * std::pow(M.condition, k);
      for (std::size_t f = 0; f < Q.entries.size(); ++f) {
        const double diff = std::abs(Q.entries[f] - brute_force_Q(s, phi, unflatten(f, k, ell + 1, 0)));
        worst_ratio = std::max(worst_ratio, diff / tol);
        if (!(diff <= tol)) ++bad;
      }
    }
  }
  return {bad == 0, "20 sceneries, k <= 3, worst |error| / (1e-8 cond^k) = " + fmt("%.2e", worst_ratio)};
}

Outcome criterion4() {
  auto t0 = Clock::now();
  int count = 0, bad = 0;
  for (int m = 0; m <= 4; ++m) {
    std::vector<int> pick(8, 0);
    std::fill(pick.end() - (m + 1), pick.end(), 1);
    do {
      std::vector<int> times;
      for (int t = 0; t < 8; ++t) {
        if (pick[t]) times.push_back(t + 1);
      }
      ++count;
      if (!srw_submatrix_check(m, times)) ++bad;
    } while (std::next_permutation(pick.begin(), pick.end()));
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && count == 218 && secs < 1,
          std::to_string(count) + " determinants, " + std::to_string(bad) + " singular, " + fmt("%.3f", secs) +
              " s"};
}

Outcome criterion5() {
  std::ostringstream table;
  bool ok = true;
  for (int m = 0; m <= 6; ++m) {
    MomentMatrix M = choose_r(lazy_walk(), m, 1e-10);
    ok = ok && M.rank == m + 1;
    table << (m ? "; " : "") << "m=" << m << " r=" << M.r << " cond=" << fmt("%.4g", M.condition);
  }
  return {ok, table.str()};
}

Outcome criterion6() {
  auto t0 = Clock::now();
  const RandomWalk& walk = lazy_walk();
  Scenery s = CoinScenery{{{0, 0.6}, {2, 0.3}}}.to_scenery();
  TestFunction phi = identity_function(s.alphabet());
  const std::vector<TVector> ts{{1}, {2}, {1, 1}};
  const int seeds = 10000;
  std::vector<std::vector<double>> vals(ts.size());
  for (int seed = 0; seed < seeds; ++seed) {
    std::vector<Symbol> obs = observe(lazy(), s, 70, static_cast<std::uint64_t>(seed));
    for (std::size_t i = 0; i < ts.size(); ++i) vals[i].push_back(block_estimate(obs, walk, phi, ts[i], 8, 64));
  }
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double mean = std::accumulate(vals[i].begin(), vals[i].end(), 0.0) / seeds;
    double var = 0;
    for (double v : vals[i]) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (seeds - 1) / seeds);
    const double exact = exact_block_mean(walk, s, phi, ts[i], 8, 64);
    const double z = (mean - exact) / se;
    ok = ok && std::abs(z) < 3;
    detail << (i ? "; " : "") << "t=" << (i == 0 ? "(1)" : i == 1 ? "(2)" : "(1,1)") << " z=" << fmt("%.2f", z);
  }
  const double secs = seconds_since(t0);
  detail << "; " << fmt("%.1f", secs) << " s";
  return {ok && secs < 600, detail.str()};
}

Outcome criterion7() {
  const RandomWalk& walk = lazy_walk();
  Scenery s = CoinScenery{{{0, 0.6}, {2, 0.3}}}.to_scenery();
  TestFunction phi = identity_function(s.alphabet());
  const double exact = exact_p(walk, s, phi, {1});
  const std::vector<long> grid{10000, 100000, 1000000};
  std::vector<double> mse(grid.size(), 0.0);
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    std::vector<Symbol> obs = observe(lazy(), s, grid.back() - 1, seed);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double e = estimate_p(obs, walk, phi, {1}, grid[i]) - exact;
      mse[i] += e * e / 32;
    }
  }
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) ok = ok && mse[i] <= mse[i - 1];
    detail << (i ? "; " : "") << "N=" << grid[i] << " mse=" << fmt("%.4e", mse[i])
           << " blocks=" << make_schedule(walk, grid[i] - 2).blocks.size();
  }
  if (mse.front() == mse.back()) detail << " (same complete blocks at every N)";
  return {ok, detail.str()};
}

Outcome criterion8() {
  const RandomWalk& walk = lazy_walk();
  int bad = 0, total = 0;
  auto check = [&](const Scenery& s, const std::vector<TestFunction>& fam, int want) {
    ++total;
    P1Access p1 = [&](std::size_t h, int r) { return exact_p_vector(walk, s, fam[h], 1, r); };
    try {
      if (estimate_ell(p1, fam.size(), walk, 8, 1e-6) != want) ++bad;
    } catch (const Error&) {
      ++bad;
    }
  };
  for (const CoinCase& c : coin_cases()) {
    check(c.scenery, {identity_function(c.scenery.alphabet())}, static_cast<int>(c.theta.size()) - 1);
  }
  for (const GeneralCase& c : general_cases()) {
    check(c.scenery, indicator_family(c.scenery.alphabet(), c.scenery.alpha()), static_cast<int>(c.truth.size()) - 1);
  }
  bool empty_ok = false;
  Scenery empty = CoinScenery{}.to_scenery();
  TestFunction id = identity_function(empty.alphabet());
  try {
    estimate_ell([&](std::size_t, int r) { return exact_p_vector(walk, empty, id, 1, r); }, 1, walk, 8, 1e-6);
  } catch (const Error& e) {
    empty_ok = e.code() == ErrorCode::NoSignal;
  }
  return {bad == 0 && empty_ok, std::to_string(total - bad) + "/" + std::to_string(total) +
                                    " widths recovered, empty scenery " + (empty_ok ? "NoSignal" : "not NoSignal")};
}

Outcome criterion9() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> bias(-1.0, 1.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> width(0, 5), dist(0, 5), len(1, 3), gap(1, 4), shiftd(-50, 50);
  const RandomWalk& walk = lazy_walk();
  auto random_scenery = [&] {
    std::map<long, double> theta;
    const int ell = width(rng);
    for (int j = 0; j <= ell; ++j) {
      if (j == 0 || j == ell || unit(rng) < 0.8) theta[j] = bias(rng);
    }
    return CoinScenery{theta}.to_scenery();
  };
  const int cases = 250;
  int q_bad = 0, p_bad = 0, b_bad = 0, c_bad = 0;
  for (int i = 0; i < cases; ++i) {
    Scenery s = random_scenery();
    TestFunction id = identity_function(s.alphabet());
    const long j = shiftd(rng);
    std::vector<int> d(len(rng));
    for (int& x : d) x = dist(rng);
    const double q = brute_force_Q(s, id, d);
    if (std::abs(brute_force_Q(shift(s, j), id, d) - q) > 1e-12 ||
        std::abs(brute_force_Q(reflect(s), id, d) - q) > 1e-12) {
      ++q_bad;
    }
    TVector t(len(rng) % 2 + 1);
    for (int& x : t) x = gap(rng);
    const double p = exact_p(walk, s, id, t);
    if (std::abs(exact_p(walk, shift(s, j), id, t) - p) > 1e-12 ||
        std::abs(exact_p(walk, reflect(s), id, t) - p) > 1e-12) {
      ++p_bad;
    }
  }
  for (int i = 0; i < cases; ++i) {
    std::vector<double> x(width(rng) + 1);
    for (double& v : x) v = std::round(bias(rng) * 4) / 4;
    BracketSequence<double> b = canonical_bracket(x);
    std::vector<double> rev(x.rbegin(), x.rend());
    if (!(canonical_bracket(b.canonical) == b) || !(canonical_bracket(rev) == b)) ++b_bad;
  }
  for (int i = 0; i < cases; ++i) {
    const int R = 1 + i % 4;
    std::map<int, double> raw;
    double total = 0;
    for (int z = 0; z <= R; ++z) {
      const double w = unit(rng) + 0.05;
      raw[z] = w;
      if (z) raw[-z] = w;
      total += z ? 2 * w : w;
    }
    for (auto& [z, w] : raw) w /= total;
    // renormalise the centre so the sum is 1 to rounding
    double rest = 0;
    for (const auto& [z, w] : raw) {
      if (z) rest += w;
    }
    raw[0] = 1.0 - rest;
    IncrementLaw law = validate(raw);
    TransitionRow row = step_distribution(law, 1 + i % 20);
    double sum = 0, asym = 0;
    for (int d = -row.half_width; d <= row.half_width; ++d) {
      sum += row.at(d);
      asym = std::max(asym, std::abs(row.at(d) - row.at(-d)));
    }
    if (std::abs(sum - 1) > 1e-12 || asym > 1e-15) ++c_bad;
  }
  std::ostringstream detail;
  detail << cases << " cases each; failures: Q " << q_bad << ", p " << p_bad << ", bracket " << b_bad
         << ", convolution " << c_bad;
  return {q_bad + p_bad + b_bad + c_bad == 0, detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact coin round trip", criterion1},
      {"general scenery round trip", criterion2},
      {"Q from p identity", criterion3},
      {"SRW submatrices full rank", criterion4},
      {"choose_r rank table", criterion5},
      {"block estimator expectation", criterion6},
      {"convergence trend", criterion7},
      {"support width estimation", criterion8},
      {"invariance properties", criterion9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
