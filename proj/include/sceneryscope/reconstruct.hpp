#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sceneryscope/q_access.hpp"
#include "sceneryscope/scenery.hpp"

namespace sceneryscope {

struct Tolerances {
  /// |Q^1_l| at or below this counts as a degenerate endpoint.
  double degenerate = 1e-10;
  /// Profile values closer than this are treated as equal when pairing.
  double tie = 1e-7;
  /// Negative discriminants down to -discriminant * (s^2 + 4|p|) clamp to 0.
  double discriminant = 1e-9;
  /// Endpoint values this small count as zero in the auxiliary path.
  double zero = 1e-6;
  /// Endpoints of a separating function must differ by more than this.
  double separation = 1e-6;
  /// Bracket agreement required when merging function profiles.
  double profile = 1e-5;
};

/// Unordered pair, stored with lo <= hi.
struct ValuePair {
  double lo;
  double hi;
};

struct ProfilePair {
  std::vector<double> left;
  std::vector<double> right;
};

ValuePair endpoints(QAccess& Q, const TestFunction& phi0, int ell, const Tolerances& tol = {});
ValuePair interior_pair(QAccess& Q, const TestFunction& phi0, int ell, int k,
                        const Tolerances& tol = {});
double center_value(QAccess& Q, const TestFunction& phi0, int ell, const Tolerances& tol = {});
ProfilePair resolve_pairing(QAccess& Q, const TestFunction& phi0, int ell,
                            const ProfilePair& profile, ValuePair next, int k,
                            const Tolerances& tol = {});

/// Oriented profile a..b (one of the two orientations).
std::vector<double> recover_sequence(QAccess& Q, const TestFunction& phi0, int ell,
                                     const Tolerances& tol = {});
BracketSequence<double> recover_profile(QAccess& Q, const TestFunction& phi0, int ell,
                                        const Tolerances& tol = {});

struct Auxiliary {
  TestFunction psi;
  double c;
};

/// Shift grid {+-2^-j : j = 1..20}, in search order.
const std::vector<double>& shift_grid();

Auxiliary select_auxiliary(QAccess& Q, const TestFunction& phi0,
                           const std::vector<TestFunction>& family, int ell,
                           const Tolerances& tol = {});
BracketSequence<double> recover_profile_general(QAccess& Q, const TestFunction& phi0,
                                                const std::vector<TestFunction>& family, int ell,
                                                const Tolerances& tol = {});

/// Per-site mean vectors (one entry per family function) in a common orientation.
std::vector<std::vector<double>> merge_values(QAccess& Q, const std::vector<TestFunction>& family,
                                              int ell, const Tolerances& tol = {});
/// Site laws from per-site family means: least squares on F dp = J_z, sum dp = 0.
std::vector<SiteLaw> laws_from_means(const std::vector<std::vector<double>>& joint,
                                     const std::vector<TestFunction>& family, const SiteLaw& alpha);
BracketSequence<SiteLaw> merge_profiles(QAccess& Q, const std::vector<TestFunction>& family,
                                        const SiteLaw& alpha, int ell, const Tolerances& tol = {});

/// Max deviation between Q entries used by the recursion and the same entries
/// recomputed from the recovered profile.
double profile_residual(QAccess& Q, const TestFunction& phi0, const std::vector<double>& profile);

enum class FamilyKind { Indicators, Identity };

struct ReconstructConfig {
  FamilyKind family = FamilyKind::Indicators;
  bool coin_mode = false;
  int m_max = 8;
  /// Negative: exact default 1e-6, estimated default 10 x standard error.
  double tau = -1.0;
  double rank_tol = 1e-10;
  int r_cap = 128;
  Tolerances tol;
};

struct Diagnostics {
  int r = 0;
  double condition = 0;
  std::vector<std::vector<double>> ell_scan;
  std::optional<int> ell_estimate;
  double residual = 0;
  std::size_t q_evaluations = 0;
};

struct Reconstruction {
  bool no_signal = false;
  int ell = -1;
  /// Laws at sites 1..ell+1 (empty when no_signal).
  std::vector<SiteLaw> sites;
  SiteLaw alpha;
  Diagnostics diagnostics;
};

std::vector<TestFunction> make_family(FamilyKind kind, const Alphabet& alphabet, const SiteLaw& alpha);

Reconstruction reconstruct_exact(const RandomWalk& walk, const Scenery& s,
                                 const ReconstructConfig& config = {});
Reconstruction reconstruct_observed(const RandomWalk& walk, std::span<const Symbol> obs, long N,
                                    const Alphabet& alphabet, const SiteLaw& alpha,
                                    const ReconstructConfig& config = {});

}  // namespace sceneryscope
