#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "hombridge/nonlinearity.hpp"
#include "hombridge/solver.hpp"
#include "hombridge/spectral.hpp"

namespace hombridge {

struct DiagnosticsOptions {
  double tail_tol = 1e-8;
  double tail_fraction = 0.25;
  std::size_t min_sign_changes = 4;
  std::size_t identity_pairs = 10;
  double decay_rate_tolerance = 0.10;  // relative
};

struct BoundCheck {
  double amplitude = 0.0;
  std::optional<double> lower_bound;  // empty: L is unbounded on the search range
  bool ok = false;
  double margin = 0.0;                // amplitude - L
  bool unbounded() const { return !lower_bound.has_value(); }
};

struct Estimate8 {
  double identity_residual = 0.0;  // |int u f(u) - c^2 int u'^2 + int u''^2|
  double inequality_slack = 0.0;   // (c^4/4) int u^2 - int u f(u)
};

struct SignChanges {
  std::size_t left = 0;
  std::size_t right = 0;
};

struct DecayReport {
  /// max of |u^(k)| over the 8 outermost grid points on each side, k = 0..3
  std::array<double, 4> boundary_max{};
  double boundary_limit = 0.0;  // 100 tail_tol
  bool boundary_ok = false;
  std::optional<double> fitted_rate;
  double expected_rate = 0.0;  // rho
  std::size_t peaks_used = 0;
  bool rate_ok = false;
  bool passed = false;
};

struct DiagnosticsReport {
  double c = 0.0;
  double amplitude = 0.0;
  std::optional<double> lower_bound;
  bool bound_ok = false;
  double bound_margin = 0.0;

  double energy_identity_residual = 0.0;
  double energy_identity_limit = 0.0;
  double energy_inequality_slack = 0.0;
  double energy_inequality_limit = 0.0;  // slack must be >= this (a negative number)
  bool energy_ok = false;

  double identity6_max_residual = 0.0;
  double identity6_limit = 0.0;
  std::size_t identity6_pairs = 0;
  bool identity6_ok = false;

  std::size_t sign_changes_left = 0;
  std::size_t sign_changes_right = 0;
  bool sign_changes_ok = false;

  DecayReport decay;
  double hamiltonian_boundary = 0.0;  // max |H| at s = +-T

  bool overall_pass = false;
};

/// max |u| refined by a parabola through the largest sample and its neighbours.
double amplitude(const Profile& p);
/// As above; rejects waves that did not converge.
double amplitude(const WaveProfile& w);

/// Checks amplitude > L(f,c). Rejects the zero profile.
BoundCheck verify_amplitude_bound(const WaveProfile& w, const NonlinearitySpec& spec, double c);

/// H = u'u'' - u u''' - c^2 u u' on the whole grid.
Profile hamiltonian_profile(const Profile& p, double c);
/// H at the grid point nearest s, for s in [-T, T].
double hamiltonian_H(const Profile& p, double c, double s);
double hamiltonian_H(const WaveProfile& w, double c, double s);

/// |H(s2) - H(s1) - integral of u''^2 - c^2 u'^2 + u f(u) over [s1, s2]|, with
/// both ends snapped to the grid.
double verify_identity6(const Profile& p, const NonlinearitySpec& spec, double c, double s1, double s2);
double verify_identity6(const WaveProfile& w, const NonlinearitySpec& spec, double c, double s1,
                        double s2);

Estimate8 verify_estimate8(const Profile& p, const NonlinearitySpec& spec, double c);
Estimate8 verify_estimate8(const WaveProfile& w, const NonlinearitySpec& spec, double c);

/// Sign changes u_j u_{j+1} < 0 in the outer tails of length 2 T tail_fraction,
/// ignoring crossings where both samples are below noise_floor. The default
/// floor is 1e3 * epsilon(real) * amplitude.
SignChanges count_sign_changes(const Profile& p, double tail_fraction = 0.25,
                               std::optional<double> noise_floor = std::nullopt);
SignChanges count_sign_changes(const WaveProfile& w, double tail_fraction = 0.25);

/// Boundary magnitudes of u..u''' and the decay rate fitted to the tail peaks
/// of |u| with 1e-9 amplitude <= |u| <= 1e-3 amplitude.
DecayReport verify_decay(const Profile& p, double rho, double tail_tol = 1e-8,
                         double rate_tolerance = 0.10);
DecayReport verify_decay(const WaveProfile& w, const NonlinearitySpec& spec,
                         double tail_tol = 1e-8);

/// Every check above on one converged wave.
DiagnosticsReport diagnose(const WaveProfile& w, const NonlinearitySpec& spec,
                           const DiagnosticsOptions& opts = {});

}  // namespace hombridge
