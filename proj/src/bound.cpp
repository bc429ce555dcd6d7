#include "hombridge/bound.hpp"

#include <cmath>
#include <sstream>

#include "hombridge/error.hpp"

namespace hombridge {

namespace {

constexpr int kSamplesPerOctave = 64;
constexpr double kScanStart = 0x1p-30;  // ~9.3e-10
constexpr double kBisectRelTol = 1e-12;

struct RatioAbove {
  const NonlinearitySpec& spec;
  double threshold;

  bool operator()(double u) const {
    const double ratio = std::abs(u) < 1e-12 ? spec.fprime_at_zero() : spec.value(u) / u;
    return ratio > threshold;
  }
};

}  // namespace

bool admissible(const NonlinearitySpec& spec, double c) {
  const double c4 = c * c * c * c;
  return c > 0 && c4 < 4.0 * spec.fprime_at_zero();
}

void require_admissible(const NonlinearitySpec& spec, double c) {
  if (!admissible(spec, c)) {
    std::ostringstream msg;
    msg << "speed c = " << c << " is not admissible: need 0 < c^4 < 4 f'(0) = "
        << 4.0 * spec.fprime_at_zero();
    throw InadmissibleSpeed(msg.str());
  }
}

BoundResult lower_bound_L(const NonlinearitySpec& spec, double c, double search_max) {
  require_admissible(spec, c);
  if (!(search_max > 0)) throw InvalidArgument("search_max must be positive");

  BoundResult result;
  result.admissible = true;
  result.threshold = c * c * c * c / 4.0;
  result.search_max = search_max;
  const RatioAbove above{spec, result.threshold};

  // Both signs advance together in |u| so the scan stops at the first
  // violation on either branch and never evaluates f far beyond it.
  double prev = 0.0;
  for (long k = 0;; ++k) {
    const double mag =
        std::min(search_max, kScanStart * std::exp2(static_cast<double>(k) / kSamplesPerOctave));
    for (double sign : {1.0, -1.0}) {
      if (above(sign * mag)) continue;
      double lo = prev, hi = mag;
      while (hi - lo > kBisectRelTol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (above(sign * mid)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      // The other sign may violate inside the same bracket; bisect it too.
      const double other = -sign;
      if (!above(other * hi)) {
        double olo = prev, ohi = hi;
        while (ohi - olo > kBisectRelTol * ohi) {
          const double mid = 0.5 * (olo + ohi);
          if (above(other * mid)) {
            olo = mid;
          } else {
            ohi = mid;
          }
        }
        if (ohi < hi) {
          lo = olo;
          hi = ohi;
        }
      }
      result.value = hi;
      result.bracket = std::make_pair(lo, hi);
      return result;
    }
    prev = mag;
    if (mag >= search_max) break;
  }
  return result;
}

bool nonexistence_predicate(const NonlinearitySpec& spec, double c, double u_max) {
  return lower_bound_L(spec, c, u_max).unbounded();
}

TailParameters tail_parameters(double fprime0, double c) {
  const double c4 = c * c * c * c;
  if (!(c > 0) || !(fprime0 > 0) || !(c4 < 4.0 * fprime0)) {
    std::ostringstream msg;
    msg << "no decaying tail for c = " << c << ", f'(0) = " << fprime0
        << ": linearized roots are purely imaginary unless 0 < c^4 < 4 f'(0)";
    throw InadmissibleSpeed(msg.str());
  }
  const double m = std::sqrt(fprime0);
  const double half_c2 = 0.5 * c * c;
  return {std::sqrt(0.5 * (m - half_c2)), std::sqrt(0.5 * (m + half_c2))};
}

TailParameters tail_parameters(const NonlinearitySpec& spec, double c) {
  return tail_parameters(spec.fprime_at_zero(), c);
}

}  // namespace hombridge
