#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sceneryscope/moments.hpp"

using namespace sceneryscope;

namespace {

IncrementLaw lazy() { return validate({{0, 0.5}, {1, 0.25}, {-1, 0.25}}); }

Scenery coins(std::map<long, double> theta) { return CoinScenery{std::move(theta)}.to_scenery(); }

Scenery two_coins() { return coins({{0, 0.6}, {2, 0.3}}); }

}  // namespace

TEST_CASE("exact p values") {
  RandomWalk walk(lazy());
  Scenery s = two_coins();
  TestFunction id = identity_function(s.alphabet());
  CHECK(exact_p(walk, s, id, {1}) == doctest::Approx(0.225).epsilon(1e-14));
  CHECK(exact_p(walk, s, id, {2}) == doctest::Approx(0.19125).epsilon(1e-14));
  Scenery empty = coins({});
  for (const TVector& t : {TVector{1}, TVector{3, 2}, TVector{1, 1, 1}}) CHECK(exact_p(walk, empty, id, t) == 0.0);
  CHECK_THROWS_AS(exact_p(walk, s, TestFunction{"u", {0.0, 1.0}}, {1}), Error);
}

TEST_CASE("exact p equals the transition-weighted sum of geometric moments") {
  RandomWalk walk(lazy());
  Scenery s = coins({{0, 0.6}, {1, -0.2}, {3, 0.5}});
  TestFunction id = identity_function(s.alphabet());
  const int m = 3;
  for (int t1 = 1; t1 <= 4; ++t1) {
    double want = 0;
    for (int d = 0; d <= m; ++d) {
      want += walk.transition(t1, d) * brute_force_Q(s, id, {d});
    }
    CHECK(exact_p(walk, s, id, {t1}) == doctest::Approx(want).epsilon(1e-12));
    for (int t2 = 1; t2 <= 4; ++t2) {
      double want2 = 0;
      for (int d1 = 0; d1 <= m; ++d1) {
        for (int d2 = 0; d2 <= m; ++d2) {
          want2 += walk.transition(t1, d1) * walk.transition(t2, d2) * brute_force_Q(s, id, {d1, d2});
        }
      }
      CHECK(exact_p(walk, s, id, {t1, t2}) == doctest::Approx(want2).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact p tensors match pointwise values") {
  RandomWalk walk(lazy());
  Scenery s = coins({{0, 0.6}, {1, -0.2}, {3, 0.5}});
  TestFunction id = identity_function(s.alphabet());
  PVector p = exact_p_vector(walk, s, id, 3, 4);
  CHECK(p.entries.size() == 64);
  for (std::size_t f = 0; f < p.entries.size(); ++f) {
    std::vector<int> t = unflatten(f, 3, 4, 1);
    CHECK(p.at(t) == doctest::Approx(exact_p(walk, s, id, t)).epsilon(1e-13));
  }
}

TEST_CASE("exact block means") {
  RandomWalk walk(lazy());
  Scenery s = two_coins();
  TestFunction id = identity_function(s.alphabet());
  CHECK(exact_block_mean(walk, s, id, {1}, 0, 2) == doctest::Approx(0.1827).epsilon(1e-13));
  CHECK(exact_block_mean(walk, s, id, {2}, 0, 2) == doctest::Approx(0.14895).epsilon(1e-13));
  CHECK(exact_block_mean(walk, s, id, {1, 1}, 0, 2) == doctest::Approx(0.054405).epsilon(1e-13));
  CHECK(exact_block_mean(walk, s, id, {1}, 1, 3) == doctest::Approx(927.0 / 4880).epsilon(1e-13));
  CHECK(exact_block_mean(walk, coins({}), id, {1}, 0, 5) == 0.0);
  // the block average tends to p_t as the block moves out
  const double far = exact_block_mean(walk, s, id, {1}, 300, 1000);
  CHECK(std::abs(far - 0.225) < std::abs(exact_block_mean(walk, s, id, {1}, 0, 2) - 0.225));
  CHECK(far == doctest::Approx(0.225).epsilon(1e-2));
}

TEST_CASE("block estimates") {
  RandomWalk walk(lazy());
  TestFunction id = identity_function(Alphabet::coin());
  std::vector<Symbol> ones(200, 1);
  double usum = 0;
  for (long k = 4; k <= 40; ++k) usum += walk.return_probability(k);
  CHECK(block_estimate(ones, walk, id, {1}, 3, 40) == doctest::Approx(usum / walk.weight(3, 40)).epsilon(1e-14));
  CHECK(block_estimate(ones, walk, id, {2, 3}, 3, 40) == doctest::Approx(usum / walk.weight(3, 40)).epsilon(1e-14));
  RandomWalk stuck(validate({{0, 1.0}}));
  CHECK(block_estimate(ones, stuck, id, {1}, 3, 40) == doctest::Approx(1.0).epsilon(1e-14));
  TestFunction zero{"zero", {0.0, 0.0}};
  CHECK(block_estimate(ones, walk, zero, {1}, 3, 40) == 0.0);
  CHECK_THROWS_AS(block_estimate(std::span<const Symbol>(ones).first(41), walk, id, {1}, 3, 40), Error);

  std::vector<Symbol> obs = observe(lazy(), two_coins(), 5000, 3);
  TestFunction neg{"neg", {1.0, -1.0}};
  for (const TVector& t : {TVector{1}, TVector{2, 1}, TVector{1, 1, 3}}) {
    const double sign = t.size() % 2 == 1 ? 1.0 : -1.0;
    CHECK(block_estimate(obs, walk, neg, t, 8, 64) ==
          doctest::Approx(sign * block_estimate(obs, walk, id, t, 8, 64)).epsilon(1e-13));
  }

  BlockEstimator est(walk, id, {2, 1}, 8, 64);
  CHECK(est.needed() == 68);
  for (long i = 9; !est.done(); ++i) est.push(obs[i]);
  CHECK(est.value() == doctest::Approx(block_estimate(obs, walk, id, {2, 1}, 8, 64)).epsilon(1e-14));
}

TEST_CASE("block schedule") {
  RandomWalk walk(lazy());
  BlockSchedule s = make_schedule(walk, 100000);
  CHECK(s.blocks == std::vector<Block>{{1, 4}, {16, 345}});
  BlockSchedule big = make_schedule(walk, 10000000);
  REQUIRE(big.blocks.size() == 3);
  CHECK(big.blocks[2] == Block{1380, 2347769});
  for (std::size_t i = 0; i < big.blocks.size(); ++i) {
    const Block& b = big.blocks[i];
    CHECK(b.m < b.n);
    CHECK(walk.weight(b.m, b.n) >= walk.weight(0, b.m));
    CHECK(walk.weight(b.m, b.n - 1) < walk.weight(0, b.m));
    if (i > 0) CHECK(b.m == 4 * big.blocks[i - 1].n);
  }
  CHECK(make_schedule(walk, 16).blocks.size() == 1);
  CHECK_THROWS_AS(make_schedule(walk, 15), Error);
}

TEST_CASE("estimate p") {
  IncrementLaw still = validate({{0, 1.0}});
  RandomWalk stuck(still);
  Scenery sure = coins({{0, 1.0}});
  std::vector<Symbol> obs = observe(still, sure, 3000, 1);
  TestFunction id = identity_function(sure.alphabet());
  CHECK(estimate_p(obs, stuck, id, {1}, 3000) == doctest::Approx(1.0));

  RandomWalk walk(lazy());
  std::vector<Symbol> a = observe(lazy(), two_coins(), 20000, 5);
  std::vector<Symbol> b = a;
  b.resize(12000);
  CHECK(estimate_p(a, walk, id, {1}, 12000) == estimate_p(b, walk, id, {1}, 12000));
  CHECK_THROWS_AS(estimate_p(b, walk, id, {1}, 12001), Error);
  PVector pv = estimate_p_vector(a, walk, id, 2, 3, 20000);
  CHECK(pv.at({2, 3}) == estimate_p(a, walk, id, {2, 3}, 20000));
}

TEST_CASE("empty scenery estimates centre on zero") {
  RandomWalk walk(lazy());
  Scenery empty = coins({});
  TestFunction id = identity_function(empty.alphabet());
  const long N = 100000;
  std::vector<double> est;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    est.push_back(estimate_p(observe(lazy(), empty, N - 1, seed), walk, id, {1}, N));
  }
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / est.size();
  double var = 0;
  for (double e : est) var += (e - mean) * (e - mean);
  var /= est.size() - 1;
  CHECK(std::abs(mean) < 3 * std::sqrt(var / est.size()));
}

TEST_CASE("support width from exact inputs") {
  RandomWalk walk(lazy());
  auto run = [&](const Scenery& s) {
    TestFunction id = identity_function(s.alphabet());
    P1Access p1 = [&](std::size_t, int r) { return exact_p_vector(walk, s, id, 1, r); };
    return estimate_ell(p1, 1, walk, 6, 1e-6);
  };
  CHECK(run(two_coins()) == 2);
  CHECK(run(coins({{0, 0.5}})) == 0);
  CHECK(run(coins({{4, 0.5}, {5, -0.3}, {9, 0.2}})) == 5);
  try {
    run(coins({}));
    FAIL("expected NoSignal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSignal);
  }
  EllScan scan;
  Scenery s = two_coins();
  TestFunction id = identity_function(s.alphabet());
  P1Access p1 = [&](std::size_t, int r) { return exact_p_vector(walk, s, id, 1, r); };
  estimate_ell(p1, 1, walk, 4, 1e-6, &scan);
  CHECK(scan.T[2][0] == doctest::Approx(0.36).epsilon(1e-9));
}
