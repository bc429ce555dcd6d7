#pragma once

#include <optional>
#include <utility>

#include "hombridge/nonlinearity.hpp"

namespace hombridge {

/// Amplitude lower bound L(f,c): the supremum of delta such that
/// f(u)/u > c^4/4 for every 0 < |u| < delta.
struct BoundResult {
  std::optional<double> value;  // empty: no violation found up to the search range
  double threshold = 0.0;       // c^4 / 4
  bool admissible = false;
  /// (last sample where the ratio exceeded the threshold, first violating |u|)
  std::optional<std::pair<double, double>> bracket;
  double search_max = 0.0;

  bool unbounded() const { return !value.has_value(); }
};

/// Decay rate and oscillation frequency of the linearized tails, i.e. the
/// root rho + i omega of lambda^4 + c^2 lambda^2 + f'(0) = 0.
struct TailParameters {
  double rho = 0.0;
  double omega = 0.0;
};

inline constexpr double kDefaultSearchMax = 1e6;

/// 0 < c^4 < 4 f'(0).
bool admissible(const NonlinearitySpec& spec, double c);

/// Throws InadmissibleSpeed unless admissible(spec, c).
void require_admissible(const NonlinearitySpec& spec, double c);

/// Outward geometric scan over both signs of u (64 log-spaced samples per
/// octave) followed by bisection of the first violation of f(u)/u > c^4/4 to
/// 1e-12 relative. Near u = 0 (|u| < 1e-12) the ratio is taken as f'(0).
BoundResult lower_bound_L(const NonlinearitySpec& spec, double c,
                          double search_max = kDefaultSearchMax);

/// Sampled form of the nonexistence criterion: true when f(u)/u stays above
/// c^4/4 on the whole range 0 < |u| <= u_max.
bool nonexistence_predicate(const NonlinearitySpec& spec, double c,
                            double u_max = kDefaultSearchMax);

TailParameters tail_parameters(const NonlinearitySpec& spec, double c);
TailParameters tail_parameters(double fprime0, double c);

}  // namespace hombridge
