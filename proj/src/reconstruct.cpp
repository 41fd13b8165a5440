#include "sceneryscope/reconstruct.hpp"

#include <cmath>
#include <numeric>

namespace sceneryscope {

namespace {

ValuePair solve_pair(double s, double p, const Tolerances& tol) {
  double disc = s * s - 4.0 * p;
  if (disc < 0) {
    if (disc < -tol.discriminant * (s * s + 4.0 * std::abs(p))) {
      fail(ErrorCode::NegativeDiscriminant,
           "sum " + std::to_string(s) + " and product " + std::to_string(p) + " have no real pair");
    }
    disc = 0;
  }
  const double root = std::sqrt(disc);
  double lo, hi;
  if (s > 0) {
    hi = 0.5 * (s + root);
    lo = p / hi;
  } else if (s < 0) {
    lo = 0.5 * (s - root);
    hi = p / lo;
  } else {
    lo = -0.5 * root;
    hi = 0.5 * root;
  }
  if (lo > hi) std::swap(lo, hi);
  return {lo, hi};
}

double first_moment(QAccess& Q, const TestFunction& phi0, int ell, const Tolerances& tol) {
  const double q1 = Q.Q(phi0, {ell});
  if (std::abs(q1) <= tol.degenerate) {
    fail(ErrorCode::DegenerateEndpoint, "Q^1_" + std::to_string(ell) + " = " + std::to_string(q1));
  }
  return q1;
}

bool degenerate(QAccess& Q, const TestFunction& phi0, int ell, const Tolerances& tol) {
  return std::abs(Q.Q(phi0, {ell})) <= tol.degenerate;
}

std::optional<TestFunction> separating_function(QAccess& Q, const std::vector<TestFunction>& family,
                                                int ell, const Tolerances& tol) {
  auto separates = [&](const TestFunction& h) {
    if (degenerate(Q, h, ell, tol)) return false;
    try {
      ValuePair e = endpoints(Q, h, ell, tol);
      return e.hi - e.lo > tol.separation;
    } catch (const Error& err) {
      if (err.code() == ErrorCode::NegativeDiscriminant) return false;
      throw;
    }
  };
  for (const auto& h : family) {
    if (separates(h)) return h;
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = 0; j < family.size(); ++j) {
      if (i == j) continue;
      for (double c : shift_grid()) {
        TestFunction h = combine(family[i], 1.0, family[j], c);
        if (separates(h)) return h;
      }
    }
  }
  return std::nullopt;
}

std::vector<double> general_sequence(QAccess& Q, const TestFunction& phi0,
                                     const std::vector<TestFunction>& family, int ell,
                                     const Tolerances& tol);

// eta(a) = eta(b): every centred function takes the same value at both ends.
// phi0 vanishes there, so recurse on the inner window with the family
// restricted to functions that also vanish at a and b.
std::vector<double> shrink_window(QAccess& Q, const TestFunction& phi0,
                                  const std::vector<TestFunction>& family, int ell,
                                  const Tolerances& tol) {
  if (ell < 2) fail(ErrorCode::NoSeparatingFunction, "window too small to shrink");
  std::vector<double> e(family.size(), 0.0);
  std::size_t pivot = 0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (!degenerate(Q, family[i], ell, tol)) {
      ValuePair v = endpoints(Q, family[i], ell, tol);
      e[i] = 0.5 * (v.lo + v.hi);
    }
    if (std::abs(e[i]) > std::abs(e[pivot])) pivot = i;
  }
  std::vector<TestFunction> inner;
  if (e[pivot] == 0.0) {
    inner = family;
  } else {
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (i == pivot) continue;
      inner.push_back(combine(family[i], 1.0, family[pivot], -e[i] / e[pivot]));
    }
  }
  std::vector<double> mid = general_sequence(Q, phi0, inner, ell - 2, tol);
  std::vector<double> out{0.0};
  out.insert(out.end(), mid.begin(), mid.end());
  out.push_back(0.0);
  return out;
}

std::vector<double> general_sequence(QAccess& Q, const TestFunction& phi0,
                                     const std::vector<TestFunction>& family, int ell,
                                     const Tolerances& tol) {
  if (ell == 0 || !degenerate(Q, phi0, ell, tol)) return recover_sequence(Q, phi0, ell, tol);
  std::optional<TestFunction> psi = separating_function(Q, family, ell, tol);
  if (!psi) return shrink_window(Q, phi0, family, ell, tol);
  const std::vector<double> base = recover_sequence(Q, *psi, ell, tol);
  for (double c : shift_grid()) {
    TestFunction g = combine(phi0, 1.0, *psi, c);
    if (degenerate(Q, g, ell, tol)) continue;
    std::vector<double> B2 = recover_sequence(Q, g, ell, tol);
    std::vector<double> cand[2] = {B2, B2};
    for (std::size_t z = 0; z < B2.size(); ++z) {
      cand[0][z] -= c * base[z];
      cand[1][z] -= c * base[B2.size() - 1 - z];
    }
    bool zero[2];
    for (int i = 0; i < 2; ++i) {
      zero[i] = std::min(std::abs(cand[i].front()), std::abs(cand[i].back())) <= tol.zero;
    }
    if (zero[0] != zero[1]) return zero[0] ? cand[0] : cand[1];
  }
  fail(ErrorCode::NoSeparatingFunction, "no shift in the grid fixes the alignment");
}

}  // namespace

ValuePair endpoints(QAccess& Q, const TestFunction& phi0, int ell, const Tolerances& tol) {
  if (ell < 1) fail(ErrorCode::InvalidArgument, "endpoints need ell >= 1");
  const double q1 = first_moment(Q, phi0, ell, tol);
  const double s = 2.0 * Q.Q(phi0, {ell, ell}) / q1;
  return solve_pair(s, 0.5 * q1, tol);
}

ValuePair interior_pair(QAccess& Q, const TestFunction& phi0, int ell, int k, const Tolerances& tol) {
  if (k < 1 || 2 * k >= ell) fail(ErrorCode::InvalidArgument, "interior pair needs 1 <= k < ell/2");
  const double q1 = first_moment(Q, phi0, ell, tol);
  const double s = 2.0 * Q.Q(phi0, {ell, k}) / q1;
  const double p = 2.0 * Q.Q(phi0, {ell, k, k, ell, k}) / (q1 * q1);
  return solve_pair(s, p, tol);
}

double center_value(QAccess& Q, const TestFunction& phi0, int ell, const Tolerances& tol) {
  if (ell < 2 || ell % 2 != 0) fail(ErrorCode::OddWidth, "center needs even ell >= 2");
  const double q1 = first_moment(Q, phi0, ell, tol);
  return Q.Q(phi0, {ell, ell / 2}) / q1;
}

ProfilePair resolve_pairing(QAccess& Q, const TestFunction& phi0, int ell,
                            const ProfilePair& profile, ValuePair next, int k,
                            const Tolerances& tol) {
  if (profile.left.size() != static_cast<std::size_t>(k) || profile.right.size() != profile.left.size()) {
    fail(ErrorCode::InvalidArgument, "profile must cover indices 0..k-1");
  }
  ProfilePair out = profile;
  int m = -1;
  for (int j = k - 1; j >= 0; --j) {
    if (std::abs(profile.left[j] - profile.right[j]) > tol.tie) {
      m = j;
      break;
    }
  }
  if (m < 0 || next.hi - next.lo <= tol.tie) {
    out.left.push_back(next.lo);
    out.right.push_back(next.hi);
    return out;
  }
  const double q1 = first_moment(Q, phi0, ell, tol);
  const double f_bad = 8.0 * Q.Q(phi0, {ell, m, m, ell, k, k, ell}) / (q1 * q1 * q1);
  const double cross_a = profile.left[m] * next.hi + profile.right[m] * next.lo;
  const double cross_b = profile.left[m] * next.lo + profile.right[m] * next.hi;
  const double da = std::abs(cross_a - f_bad);
  const double db = std::abs(cross_b - f_bad);
  if (da <= tol.tie && db <= tol.tie) {
    fail(ErrorCode::AmbiguousPairing, "both orientations match at k = " + std::to_string(k));
  }
  if (da <= db) {
    out.left.push_back(next.lo);
    out.right.push_back(next.hi);
  } else {
    out.left.push_back(next.hi);
    out.right.push_back(next.lo);
  }
  return out;
}

std::vector<double> recover_sequence(QAccess& Q, const TestFunction& phi0, int ell, const Tolerances& tol) {
  if (ell < 0) fail(ErrorCode::InvalidArgument, "ell must be >= 0");
  if (ell == 0) {
    const double q1 = Q.Q(phi0, {0});
    if (q1 <= tol.degenerate) return {0.0};
    const double q2 = Q.Q(phi0, {0, 0});
    return {std::copysign(std::sqrt(q1), q2)};
  }
  ValuePair e = endpoints(Q, phi0, ell, tol);
  ProfilePair prof{{e.lo}, {e.hi}};
  for (int k = 1; 2 * k < ell; ++k) {
    prof = resolve_pairing(Q, phi0, ell, prof, interior_pair(Q, phi0, ell, k, tol), k, tol);
  }
  std::vector<double> seq = prof.left;
  if (ell % 2 == 0) seq.push_back(center_value(Q, phi0, ell, tol));
  seq.insert(seq.end(), prof.right.rbegin(), prof.right.rend());
  return seq;
}

BracketSequence<double> recover_profile(QAccess& Q, const TestFunction& phi0, int ell,
                                        const Tolerances& tol) {
  return canonical_bracket(recover_sequence(Q, phi0, ell, tol));
}

const std::vector<double>& shift_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    for (int j = 1; j <= 20; ++j) {
      g.push_back(std::ldexp(1.0, -j));
      g.push_back(-std::ldexp(1.0, -j));
    }
    return g;
  }();
  return grid;
}

Auxiliary select_auxiliary(QAccess& Q, const TestFunction& phi0,
                           const std::vector<TestFunction>& family, int ell, const Tolerances& tol) {
  std::optional<TestFunction> psi = separating_function(Q, family, ell, tol);
  if (!psi) fail(ErrorCode::NoSeparatingFunction, "family does not separate the endpoint laws");
  for (double c : shift_grid()) {
    if (!degenerate(Q, combine(phi0, 1.0, *psi, c), ell, tol)) return {*psi, c};
  }
  fail(ErrorCode::NoSeparatingFunction, "no shift makes the endpoints nondegenerate");
}

BracketSequence<double> recover_profile_general(QAccess& Q, const TestFunction& phi0,
                                                const std::vector<TestFunction>& family, int ell,
                                                const Tolerances& tol) {
  return canonical_bracket(general_sequence(Q, phi0, family, ell, tol));
}

std::vector<std::vector<double>> merge_values(QAccess& Q, const std::vector<TestFunction>& family,
                                              int ell, const Tolerances& tol) {
  if (family.empty()) fail(ErrorCode::InvalidArgument, "empty function family");
  const std::size_t n = static_cast<std::size_t>(ell) + 1;
  std::vector<std::vector<double>> J(n);
  std::vector<double> first = general_sequence(Q, family[0], family, ell, tol);
  for (std::size_t z = 0; z < n; ++z) J[z].push_back(first[z]);
  for (std::size_t k = 1; k < family.size(); ++k) {
    std::vector<double> Bk = general_sequence(Q, family[k], family, ell, tol);
    std::size_t j = 0;
    double gap = 0;
    for (std::size_t z = 0; 2 * z < n; ++z) {
      for (std::size_t i = 0; i < k; ++i) {
        double g = std::abs(J[z][i] - J[n - 1 - z][i]);
        if (g > gap) {
          gap = g;
          j = z;
        }
      }
    }
    bool aligned = true;
    if (gap > tol.profile && !is_palindrome(Bk, tol.profile)) {
      std::vector<double> c(k);
      for (std::size_t i = 0; i < k; ++i) c[i] = (J[j][i] - J[n - 1 - j][i]) / gap;
      TestFunction g = family[k];
      g.name = "T_c+" + family[k].name;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t s = 0; s < g.values.size(); ++s) g.values[s] += c[i] * family[i].values[s];
      }
      std::vector<double> good(n), bad(n);
      for (std::size_t z = 0; z < n; ++z) {
        double cj = 0;
        for (std::size_t i = 0; i < k; ++i) cj += c[i] * J[z][i];
        good[z] = cj + Bk[z];
        bad[z] = cj + Bk[n - 1 - z];
      }
      std::vector<double> Bg = general_sequence(Q, g, family, ell, tol);
      const double dg = bracket_distance(Bg, good);
      const double db = bracket_distance(Bg, bad);
      if (std::min(dg, db) > tol.profile) {
        fail(ErrorCode::InconsistentProfiles,
             "combined profile of " + family[k].name + " matches neither alignment");
      }
      aligned = dg <= db;
    }
    for (std::size_t z = 0; z < n; ++z) J[z].push_back(aligned ? Bk[z] : Bk[n - 1 - z]);
  }
  return J;
}

std::vector<SiteLaw> laws_from_means(const std::vector<std::vector<double>>& joint,
                                     const std::vector<TestFunction>& family, const SiteLaw& alpha) {
  const Eigen::Index K = static_cast<Eigen::Index>(family.size());
  const Eigen::Index A = static_cast<Eigen::Index>(alpha.probs.size());
  Mat<double> F(K + 1, A);
  for (Eigen::Index i = 0; i < K; ++i) {
    if (static_cast<Eigen::Index>(family[i].values.size()) != A) {
      fail(ErrorCode::AlphabetMismatch, "family function on a different alphabet");
    }
    for (Eigen::Index s = 0; s < A; ++s) F(i, s) = family[i].values[s];
  }
  F.row(K).setOnes();
  auto qr = F.colPivHouseholderQr();
  if (qr.rank() < A) fail(ErrorCode::InvalidArgument, "family does not determine site laws");
  std::vector<SiteLaw> laws;
  for (const auto& Jz : joint) {
    Eigen::VectorXd rhs(K + 1);
    for (Eigen::Index i = 0; i < K; ++i) rhs(i) = Jz.at(static_cast<std::size_t>(i));
    rhs(K) = 0.0;
    Eigen::VectorXd dp = qr.solve(rhs);
    SiteLaw law{alpha.probs};
    for (Eigen::Index s = 0; s < A; ++s) law.probs[s] += dp(s);
    laws.push_back(std::move(law));
  }
  return laws;
}

BracketSequence<SiteLaw> merge_profiles(QAccess& Q, const std::vector<TestFunction>& family,
                                        const SiteLaw& alpha, int ell, const Tolerances& tol) {
  return canonical_bracket(laws_from_means(merge_values(Q, family, ell, tol), family, alpha));
}

double profile_residual(QAccess& Q, const TestFunction& phi0, const std::vector<double>& profile) {
  const int ell = static_cast<int>(profile.size()) - 1;
  std::vector<std::vector<int>> entries;
  if (ell == 0) {
    entries = {{0}, {0, 0}};
  } else {
    entries = {{ell}, {ell, ell}};
    for (int k = 1; 2 * k < ell; ++k) {
      entries.push_back({ell, k});
      entries.push_back({ell, k, k, ell, k});
      for (int m = 0; m < k; ++m) entries.push_back({ell, m, m, ell, k, k, ell});
    }
    if (ell % 2 == 0) entries.push_back({ell, ell / 2});
  }
  double worst = 0;
  for (const auto& d : entries) {
    worst = std::max(worst, std::abs(Q.Q(phi0, d) - brute_force_Q(profile, d)));
  }
  return worst;
}

std::vector<TestFunction> make_family(FamilyKind kind, const Alphabet& alphabet, const SiteLaw& alpha) {
  if (kind == FamilyKind::Identity) return {center(identity_function(alphabet), alpha)};
  return indicator_family(alphabet, alpha);
}

namespace {

template <class F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

Reconstruction assemble(QAccess& Q, const std::vector<TestFunction>& family, const SiteLaw& alpha,
                        int ell, const ReconstructConfig& config, const Tolerances& tol) {
  Reconstruction res;
  res.ell = ell;
  res.alpha = alpha;
  std::vector<std::vector<double>> J;
  if (config.coin_mode) {
    std::vector<double> seq =
        staged("recover_profile", [&] { return recover_sequence(Q, family[0], ell, tol); });
    for (double v : seq) J.push_back({v});
  } else {
    J = staged("merge_profiles", [&] { return merge_values(Q, family, ell, tol); });
  }
  std::vector<double> primary;
  for (const auto& Jz : J) primary.push_back(Jz[0]);
  res.diagnostics.residual = profile_residual(Q, family[0], primary);
  std::vector<TestFunction> fam = config.coin_mode ? std::vector<TestFunction>{family[0]} : family;
  res.sites = canonical_bracket(laws_from_means(J, fam, alpha)).canonical;
  res.diagnostics.q_evaluations = Q.evaluations();
  return res;
}

}  // namespace

Reconstruction reconstruct_exact(const RandomWalk& walk, const Scenery& s, const ReconstructConfig& config) {
  const FamilyKind kind = config.coin_mode ? FamilyKind::Identity : config.family;
  std::vector<TestFunction> family = make_family(kind, s.alphabet(), s.alpha());
  Diagnostics diag;
  EllScan scan;
  try {
    const double tau = config.tau >= 0 ? config.tau : 1e-6;
    diag.ell_estimate = estimate_ell(
        [&](std::size_t h, int r) { return exact_p_vector(walk, s, family[h], 1, r); },
        family.size(), walk, config.m_max, tau, &scan);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSignal) throw e.with_stage("estimate_ell");
  }
  diag.ell_scan = scan.T;
  if (s.empty()) {
    Reconstruction res;
    res.no_signal = true;
    res.alpha = s.alpha();
    res.diagnostics = diag;
    return res;
  }
  const int ell = static_cast<int>(bounds(s).ell);
  auto Q = staged("choose_r", [&] {
    return std::make_unique<MomentChainQ>(walk, s, ell, config.rank_tol, config.r_cap);
  });
  Reconstruction res = assemble(*Q, family, s.alpha(), ell, config, config.tol);
  diag.r = Q->moment_matrix().r;
  diag.condition = Q->moment_matrix().condition;
  diag.residual = res.diagnostics.residual;
  diag.q_evaluations = res.diagnostics.q_evaluations;
  res.diagnostics = diag;
  return res;
}

Reconstruction reconstruct_observed(const RandomWalk& walk, std::span<const Symbol> obs, long N,
                                    const Alphabet& alphabet, const SiteLaw& alpha,
                                    const ReconstructConfig& config) {
  const FamilyKind kind = config.coin_mode ? FamilyKind::Identity : config.family;
  std::vector<TestFunction> family = make_family(kind, alphabet, alpha);
  Diagnostics diag;
  // Threshold per (m, h): 10 x standard error of T(m, h) across blocks.
  auto tau = [&](int m, std::size_t h) {
    if (config.tau >= 0) return config.tau;
    MomentMatrix M = choose_r(walk, m, config.rank_tol, config.r_cap);
    std::vector<std::vector<double>> per_t;
    std::size_t B = SIZE_MAX;
    for (int t = 1; t <= M.r; ++t) {
      per_t.push_back(block_values(obs, walk, family[h], {t}, N));
      B = std::min(B, per_t.back().size());
    }
    if (B < 2) return 0.1;
    std::vector<double> T(B, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
      for (int t = 0; t < M.r; ++t) T[i] += M.pinv(m, t) * per_t[t][i];
    }
    double mean = std::accumulate(T.begin(), T.end(), 0.0) / B;
    double var = 0;
    for (double x : T) var += (x - mean) * (x - mean);
    var /= static_cast<double>(B - 1);
    return 10.0 * std::sqrt(var / B);
  };
  EllScan scan;
  int ell = -1;
  double tau_ell = 0;
  try {
    ell = estimate_ell(
        [&](std::size_t h, int r) { return estimate_p_vector(obs, walk, family[h], 1, r, N); },
        family.size(), walk, config.m_max, tau, &scan);
    for (std::size_t h = 0; h < family.size(); ++h) tau_ell = std::max(tau_ell, tau(ell, h));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSignal) throw e.with_stage("estimate_ell");
    Reconstruction res;
    res.no_signal = true;
    res.alpha = alpha;
    diag.ell_scan = scan.T;
    res.diagnostics = diag;
    return res;
  }
  diag.ell_scan = scan.T;
  diag.ell_estimate = ell;
  auto Q = staged("choose_r", [&] {
    return std::make_unique<EstimatedQ>(walk, obs, N, ell, config.rank_tol, config.r_cap);
  });
  Tolerances tol = config.tol;
  tol.degenerate = std::max(tol.degenerate, tau_ell);
  tol.tie = std::max(tol.tie, tau_ell);
  tol.discriminant = std::max(tol.discriminant, 1.0);
  Reconstruction res = assemble(*Q, family, alpha, ell, config, tol);
  diag.r = Q->moment_matrix().r;
  diag.condition = Q->moment_matrix().condition;
  diag.residual = res.diagnostics.residual;
  diag.q_evaluations = res.diagnostics.q_evaluations;
  res.diagnostics = diag;
  return res;
}

}  // namespace sceneryscope
