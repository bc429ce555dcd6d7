#include "hombridge/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hombridge/bound.hpp"
#include "hombridge/error.hpp"

namespace hombridge {

namespace {

constexpr std::size_t kBoundaryPoints = 8;
constexpr std::size_t kMinDecayPeaks = 3;
constexpr double kPeakWindowLow = 1e-9;
constexpr double kPeakWindowHigh = 1e-3;

struct Derivatives {
  const Profile& u;
  Profile d1, d2, d3;

  explicit Derivatives(const Profile& p)
      : u(p), d1(derivative(p, 1)), d2(derivative(p, 2)), d3(derivative(p, 3)) {}

  real H(std::size_t j, real c) const {
    const real v = u.values[j];
    return d1.values[j] * d2.values[j] - v * d3.values[j] - c * c * v * d1.values[j];
  }
};

void require_converged(const WaveProfile& w) {
  if (!w.converged) throw InvalidArgument("diagnostics need a converged wave (status: " +
                                          std::string(to_string(w.status)) + ")");
}

std::size_t snap_index(const Grid& g, real s) {
  const auto n = static_cast<long long>(g.size());
  const auto i = static_cast<long long>(std::round((s + g.half_length()) / g.spacing()));
  return static_cast<std::size_t>(std::clamp(i, 0LL, n));
}

Profile identity_integrand(const Derivatives& d, const NonlinearitySpec& spec, real c) {
  Profile g(d.u.grid);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const real v = d.u.values[j];
    g.values[j] = d.d2.values[j] * d.d2.values[j] - c * c * d.d1.values[j] * d.d1.values[j] +
                  v * spec.value(v);
  }
  return g;
}

double identity6_on(const Derivatives& d, const Profile& integrand, real c, std::size_t i1,
                    std::size_t i2) {
  if (i1 == i2) return 0.0;
  const std::size_t n = d.u.size();
  const real dH = d.H(i2 % n, c) - d.H(i1 % n, c);
  return static_cast<double>(std::abs(dH - quadrature_indices(integrand, i1, i2)));
}

// Value of the parabola through (-1, a), (0, b), (1, c) at its vertex, and
// the vertex offset, when the samples are concave; else (b, 0).
std::pair<real, real> parabola_peak(real a, real b, real c) {
  const real denom = a - 2 * b + c;
  if (!(denom < 0)) return {b, 0};
  const real offset = 0.5L * (a - c) / denom;
  return {b - 0.125L * (a - c) * (a - c) / denom, offset};
}

real default_noise_floor(const Profile& p) {
  return 1e3L * std::numeric_limits<real>::epsilon() * static_cast<real>(amplitude(p));
}

// Grid indices just after each zero of u going outward from s = 0 on the
// right (direction +1) or left (-1), located by linear interpolation and
// snapped to the nearest grid point.
std::vector<std::size_t> zeros_outward(const Profile& p, int direction, std::size_t count, real floor) {
  std::vector<std::size_t> out;
  const std::size_t n = p.size();
  const std::size_t mid = n / 2;
  const real h = p.grid.spacing();
  for (std::size_t k = 0; k + 1 < n / 2 && out.size() < count; ++k) {
    const std::size_t j0 = direction > 0 ? mid + k : mid - k;
    const std::size_t j1 = direction > 0 ? j0 + 1 : j0 - 1;
    const real a = p.values[j0], b = p.values[j1];
    if (!(a * b < 0) || (std::abs(a) < floor && std::abs(b) < floor)) continue;
    const real s0 = p.grid.point(j0);
    const real s = s0 + direction * h * a / (a - b);
    out.push_back(snap_index(p.grid, s));
  }
  return out;
}

}  // namespace

double amplitude(const Profile& p) {
  const std::size_t n = p.size();
  if (n == 0) return 0.0;
  std::size_t j = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(p.values[i]) > std::abs(p.values[j])) j = i;
  const real b = p.values[j];
  if (b == 0) return 0.0;
  const real sign = b < 0 ? -1 : 1;
  const auto [peak, offset] =
      parabola_peak(sign * p.values[(j + n - 1) % n], sign * b, sign * p.values[(j + 1) % n]);
  (void)offset;
  return static_cast<double>(std::max(peak, sign * b));
}

double amplitude(const WaveProfile& w) {
  require_converged(w);
  return amplitude(w.profile);
}

BoundCheck verify_amplitude_bound(const WaveProfile& w, const NonlinearitySpec& spec, double c) {
  BoundCheck out;
  out.amplitude = amplitude(w);
  if (out.amplitude == 0) throw InvalidArgument("the amplitude bound concerns nonzero waves");
  const auto L = lower_bound_L(spec, c);
  out.lower_bound = L.value;
  if (L.value) {
    out.margin = out.amplitude - *L.value;
    out.ok = out.margin > 0;
  }
  return out;
}

Profile hamiltonian_profile(const Profile& p, double c) {
  const Derivatives d(p);
  Profile H(p.grid);
  for (std::size_t j = 0; j < p.size(); ++j) H.values[j] = d.H(j, c);
  return H;
}

double hamiltonian_H(const Profile& p, double c, double s) {
  const double T = p.grid.half_length();
  if (!(s >= -T && s <= T)) throw InvalidArgument("s must lie in [-T, T]");
  const Derivatives d(p);
  return static_cast<double>(d.H(p.grid.nearest_index(s), c));
}

double hamiltonian_H(const WaveProfile& w, double c, double s) {
  return hamiltonian_H(w.profile, c, s);
}

double verify_identity6(const Profile& p, const NonlinearitySpec& spec, double c, double s1,
                        double s2) {
  if (!(s1 < s2)) throw InvalidArgument("identity check needs s1 < s2");
  const Derivatives d(p);
  const Profile g = identity_integrand(d, spec, c);
  return identity6_on(d, g, c, snap_index(p.grid, s1), snap_index(p.grid, s2));
}

double verify_identity6(const WaveProfile& w, const NonlinearitySpec& spec, double c, double s1,
                        double s2) {
  require_converged(w);
  return verify_identity6(w.profile, spec, c, s1, s2);
}

Estimate8 verify_estimate8(const Profile& p, const NonlinearitySpec& spec, double c) {
  const Profile d1 = derivative(p, 1), d2 = derivative(p, 2);
  Profile uf(p.grid), u2(p.grid);
  for (std::size_t j = 0; j < p.size(); ++j) {
    const real v = p.values[j];
    uf.values[j] = v * spec.value(v);
    u2.values[j] = v * v;
  }
  const real c2 = static_cast<real>(c) * c;
  const real I_uf = quadrature(uf);
  const real I_d1 = quadrature(pointwise_product(d1, d1));
  const real I_d2 = quadrature(pointwise_product(d2, d2));
  const real I_u2 = quadrature(u2);
  Estimate8 out;
  out.identity_residual = static_cast<double>(std::abs(I_uf - c2 * I_d1 + I_d2));
  out.inequality_slack = static_cast<double>(c2 * c2 / 4 * I_u2 - I_uf);
  return out;
}

Estimate8 verify_estimate8(const WaveProfile& w, const NonlinearitySpec& spec, double c) {
  require_converged(w);
  return verify_estimate8(w.profile, spec, c);
}

SignChanges count_sign_changes(const Profile& p, double tail_fraction,
                               std::optional<double> noise_floor) {
  if (!(tail_fraction > 0 && tail_fraction < 0.5))
    throw InvalidArgument("tail_fraction must lie in (0, 0.5)");
  const real floor = noise_floor ? static_cast<real>(*noise_floor) : default_noise_floor(p);
  const std::size_t n = p.size();
  // Right tail: pairs (j, j+1) with s_j in [T - 2 T f, T); the last pair
  // wraps to s = T = -T. The left tail holds the mirror images of these.
  const auto tail_points = static_cast<std::size_t>(std::llround(tail_fraction * n));
  auto crosses = [&](std::size_t a, std::size_t b) {
    const real x = p.values[a], y = p.values[b % n];
    return x * y < 0 && !(std::abs(x) < floor && std::abs(y) < floor);
  };
  SignChanges out;
  for (std::size_t j = n - tail_points; j < n; ++j) out.right += crosses(j, j + 1);
  for (std::size_t i = 0; i < tail_points; ++i) out.left += crosses(i, i + 1);
  return out;
}

SignChanges count_sign_changes(const WaveProfile& w, double tail_fraction) {
  return count_sign_changes(w.profile, tail_fraction);
}

DecayReport verify_decay(const Profile& p, double rho, double tail_tol, double rate_tolerance) {
  DecayReport out;
  out.expected_rate = rho;
  out.boundary_limit = 100 * tail_tol;
  const std::size_t n = p.size();
  const Profile* orders[4];
  const Profile d1 = derivative(p, 1), d2 = derivative(p, 2), d3 = derivative(p, 3);
  orders[0] = &p;
  orders[1] = &d1;
  orders[2] = &d2;
  orders[3] = &d3;
  for (int k = 0; k < 4; ++k) {
    real m = 0;
    for (std::size_t i = 0; i < kBoundaryPoints; ++i) {
      m = std::max(m, std::abs(orders[k]->values[i]));
      m = std::max(m, std::abs(orders[k]->values[n - 1 - i]));
    }
    out.boundary_max[k] = static_cast<double>(m);
  }
  out.boundary_ok = std::all_of(out.boundary_max.begin(), out.boundary_max.end(),
                                [&](double v) { return v <= out.boundary_limit; });

  const double amp = amplitude(p);
  if (amp == 0) {
    out.rate_ok = true;
    out.passed = out.boundary_ok;
    return out;
  }

  // Local maxima of |u| on s > 0 inside the fitting window.
  std::vector<real> xs, ys;
  const real h = p.grid.spacing();
  for (std::size_t j = n / 2 + 1; j + 1 < n; ++j) {
    const real a = std::abs(p.values[j - 1]), b = std::abs(p.values[j]), c = std::abs(p.values[j + 1]);
    if (!(b >= a && b > c)) continue;
    const auto [peak, offset] = parabola_peak(a, b, c);
    if (peak < kPeakWindowLow * amp || peak > kPeakWindowHigh * amp) continue;
    xs.push_back(p.grid.point(j) + offset * h);
    ys.push_back(std::log(peak));
  }
  out.peaks_used = xs.size();
  if (xs.size() >= kMinDecayPeaks) {
    const auto m = static_cast<real>(xs.size());
    real sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const real slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.fitted_rate = static_cast<double>(-slope);
    out.rate_ok = std::abs(*out.fitted_rate - rho) <= rate_tolerance * rho;
  }
  out.passed = out.boundary_ok && out.rate_ok;
  return out;
}

DecayReport verify_decay(const WaveProfile& w, const NonlinearitySpec& spec, double tail_tol) {
  require_converged(w);
  return verify_decay(w.profile, tail_parameters(spec, w.c).rho, tail_tol);
}

DiagnosticsReport diagnose(const WaveProfile& w, const NonlinearitySpec& spec,
                           const DiagnosticsOptions& opts) {
  require_converged(w);
  const Profile& p = w.profile;
  const real c = w.c;
  DiagnosticsReport r;
  r.c = w.c;

  const auto bound = verify_amplitude_bound(w, spec, w.c);
  r.amplitude = bound.amplitude;
  r.lower_bound = bound.lower_bound;
  r.bound_ok = bound.ok;
  r.bound_margin = bound.margin;
  const double amp2 = r.amplitude * r.amplitude;
  const double length = 2 * p.grid.half_length();

  const auto e8 = verify_estimate8(p, spec, w.c);
  r.energy_identity_residual = e8.identity_residual;
  r.energy_identity_limit = 1e-8 * (1 + amp2) * length;
  r.energy_inequality_slack = e8.inequality_slack;
  r.energy_inequality_limit = -1e-10 * length * amp2;
  r.energy_ok = r.energy_identity_residual <= r.energy_identity_limit &&
                r.energy_inequality_slack >= r.energy_inequality_limit;

  // Hamiltonian identity between consecutive zeros, half the pairs on each side.
  const Derivatives d(p);
  const Profile g = identity_integrand(d, spec, c);
  const real floor = default_noise_floor(p);
  const std::size_t per_side = (opts.identity_pairs + 1) / 2;
  r.identity6_limit = 1e-6 * (1 + amp2);
  for (int dir : {1, -1}) {
    const auto z = zeros_outward(p, dir, per_side + 1, floor);
    for (std::size_t k = 0; k + 1 < z.size() && r.identity6_pairs < opts.identity_pairs; ++k) {
      const std::size_t a = std::min(z[k], z[k + 1]), b = std::max(z[k], z[k + 1]);
      r.identity6_max_residual = std::max(r.identity6_max_residual, identity6_on(d, g, c, a, b));
      ++r.identity6_pairs;
    }
  }
  r.identity6_ok = r.identity6_pairs > 0 && r.identity6_max_residual <= r.identity6_limit;

  const auto sc = count_sign_changes(p, opts.tail_fraction);
  r.sign_changes_left = sc.left;
  r.sign_changes_right = sc.right;
  r.sign_changes_ok = sc.left >= opts.min_sign_changes && sc.right >= opts.min_sign_changes;

  r.decay = verify_decay(p, tail_parameters(spec, w.c).rho, opts.tail_tol, opts.decay_rate_tolerance);
  r.hamiltonian_boundary = static_cast<double>(std::abs(d.H(0, c)));

  r.overall_pass = r.bound_ok && r.energy_ok && r.identity6_ok && r.sign_changes_ok && r.decay.passed;
  return r;
}

}  // namespace hombridge
