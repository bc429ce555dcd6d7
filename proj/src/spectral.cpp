#include "hombridge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fft.hpp"
#include "hombridge/error.hpp"

namespace hombridge {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_same_grid(const Profile& a, const Profile& b) {
  if (!(a.grid == b.grid)) throw InvalidArgument("profiles live on different grids");
}

std::vector<std::complex<real>> raw_spectrum(const Profile& p) {
  std::vector<std::complex<real>> c(p.size() / 2 + 1);
  detail::forward_fft(p.values, c);
  return c;
}

Profile from_spectrum(const Grid& g, const std::vector<std::complex<real>>& c) {
  Profile out(g);
  detail::inverse_fft(c, out.values);
  const real scale = 1.0L / static_cast<real>(g.size());
  for (auto& v : out.values) v *= scale;
  return out;
}

}  // namespace

Grid::Grid(double half_length, std::size_t n) : half_length_(half_length), n_(n) {
  if (!(half_length > 0) || !std::isfinite(half_length))
    throw InvalidArgument("grid half-length T must be positive and finite");
  if (!is_power_of_two(n) || n < 256)
    throw InvalidArgument("grid size n must be a power of two >= 256, got " + std::to_string(n));
}

std::size_t Grid::nearest_index(real s) const {
  const real t = std::round((s + half_length_) / spacing());
  const auto n = static_cast<long long>(n_);
  long long j = static_cast<long long>(t) % n;
  if (j < 0) j += n;
  return static_cast<std::size_t>(j);
}

Profile::Profile(const Grid& g, std::vector<real> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size())
    throw InvalidArgument("profile has " + std::to_string(values.size()) +
                          " values for a grid of " + std::to_string(g.size()));
  for (real x : values)
    if (!std::isfinite(x)) throw InvalidArgument("profile values must be finite");
}

real Profile::sup_norm() const {
  real m = 0;
  for (real v : values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<std::complex<real>> fourier_coefficients(const Profile& p) {
  auto c = raw_spectrum(p);
  const real scale = 1.0L / static_cast<real>(p.size());
  for (auto& x : c) x *= scale;
  return c;
}

Profile derivative(const Profile& p, int order, real noise_floor) {
  if (order < 1 || order > 4) throw InvalidArgument("derivative order must be 1..4");
  auto c = raw_spectrum(p);
  const std::size_t nyquist = p.size() / 2;

  real peak = 0;
  for (const auto& x : c) peak = std::max(peak, std::abs(x));
  const real cut = noise_floor * peak;

  // (i xi)^k = xi^k * i^k
  static const std::complex<real> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const auto unit = ipow[order % 4];
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (std::abs(c[m]) <= cut || (order % 2 == 1 && m == nyquist)) {
      c[m] = 0;
      continue;
    }
    const real xi = p.grid.wavenumber(m);
    real xk = 1;
    for (int i = 0; i < order; ++i) xk *= xi;
    c[m] *= unit * xk;
  }
  return from_spectrum(p.grid, c);
}

Profile beam_operator(const Profile& p, double c, real noise_floor) {
  auto coef = raw_spectrum(p);
  real peak = 0;
  for (const auto& x : coef) peak = std::max(peak, std::abs(x));
  const real cut = noise_floor * peak;
  const real c2 = static_cast<real>(c) * c;
  for (std::size_t m = 0; m < coef.size(); ++m) {
    if (std::abs(coef[m]) <= cut) {
      coef[m] = 0;
      continue;
    }
    const real xi2 = p.grid.wavenumber(m) * p.grid.wavenumber(m);
    coef[m] *= xi2 * (xi2 - c2);
  }
  return from_spectrum(p.grid, coef);
}

real quadrature(const Profile& p) {
  real sum = 0;
  for (real v : p.values) sum += v;
  return p.grid.spacing() * sum;
}

real quadrature_indices(const Profile& p, std::size_t i1, std::size_t i2) {
  const std::size_t n = p.size();
  if (!(i1 < i2) || i2 > n) throw InvalidArgument("quadrature needs grid indices i1 < i2 <= n");
  auto at = [&](std::size_t i) { return p.values[i % n]; };
  const real h = p.grid.spacing();
  const std::size_t panels = i2 - i1;

  if (panels == 1) return 0.5L * h * (at(i1) + at(i2));

  auto simpson = [&](std::size_t a, std::size_t b) {
    real s = at(a) + at(b);
    for (std::size_t i = a + 1; i < b; ++i) s += ((i - a) % 2 == 1 ? 4 : 2) * at(i);
    return s * h / 3;
  };

  if (panels % 2 == 0) return simpson(i1, i2);
  const std::size_t split = i2 - 3;
  const real tail = 3.0L * h / 8.0L * (at(split) + 3 * at(split + 1) + 3 * at(split + 2) + at(i2));
  return (split > i1 ? simpson(i1, split) : 0.0L) + tail;
}

real quadrature_between(const Profile& p, real s1, real s2) {
  if (!(s1 < s2)) throw InvalidArgument("quadrature_between needs s1 < s2");
  const real T = p.grid.half_length();
  const real h = p.grid.spacing();
  const auto n = static_cast<long long>(p.size());
  auto snap = [&](real s) {
    const auto i = static_cast<long long>(std::round((s + T) / h));
    return static_cast<std::size_t>(std::clamp(i, 0LL, n));
  };
  const std::size_t i1 = snap(s1), i2 = snap(s2);
  if (i1 == i2) return 0;
  return quadrature_indices(p, i1, i2);
}

double multiplier_max(double c) {
  if (!(c > 0) || !std::isfinite(c)) throw InvalidArgument("multiplier_max needs c > 0");
  const long double c2 = static_cast<long double>(c) * c;
  auto g = [c2](long double xi) { return c2 * xi * xi - xi * xi * xi * xi; };

  // The maximizer lies in (0, c); search [0, 2c], then zoom around the best
  // sample a few times.
  constexpr int kPoints = 1024;
  long double lo = 0, hi = 2.0L * c;
  long double best_xi = 0, best = g(0);
  for (int round = 0; round < 6; ++round) {
    const long double step = (hi - lo) / kPoints;
    for (int i = 0; i <= kPoints; ++i) {
      const long double xi = lo + i * step;
      const long double v = g(xi);
      if (v > best) {
        best = v;
        best_xi = xi;
      }
    }
    lo = std::max(0.0L, best_xi - step);
    hi = best_xi + step;
  }
  return static_cast<double>(best);
}

Profile symmetrize(const Profile& p) {
  Profile out(p.grid);
  for (std::size_t j = 0; j < p.size(); ++j)
    out.values[j] = 0.5L * (p.values[j] + p.values[p.grid.mirror(j)]);
  return out;
}

real evenness_defect(const Profile& p) {
  real d = 0;
  for (std::size_t j = 0; j < p.size(); ++j)
    d = std::max(d, std::abs(p.values[j] - p.values[p.grid.mirror(j)]));
  return d;
}

Profile resample(const Profile& p, const Grid& target) {
  const auto c = fourier_coefficients(p);
  const std::size_t n = p.size();
  const std::size_t nyquist = n / 2;

  // Same period, finer grid: zero-pad the spectrum.
  if (target.half_length() == p.grid.half_length() && target.size() >= n) {
    std::vector<std::complex<real>> padded(target.size() / 2 + 1);
    for (std::size_t m = 0; m < nyquist; ++m) padded[m] = c[m];
    padded[nyquist] = target.size() > n ? 0.5L * c[nyquist] : c[nyquist];
    const real scale = static_cast<real>(target.size());
    for (auto& x : padded) x *= scale;
    return from_spectrum(target, padded);
  }

  // General case: evaluate the trigonometric interpolant point by point.
  const real T = p.grid.half_length();
  std::vector<std::size_t> active;
  for (std::size_t m = 1; m <= nyquist; ++m)
    if (c[m] != std::complex<real>(0, 0)) active.push_back(m);

  Profile out(target);
  for (std::size_t j = 0; j < target.size(); ++j) {
    const real s = target.point(j);
    if (s < -T || s > T) continue;
    const real theta = Grid::pi() * (s + T) / T;
    const std::complex<real> step(std::cos(theta), std::sin(theta));
    std::complex<real> rot(1, 0);
    std::size_t at = 0;
    real sum = c[0].real();
    for (std::size_t m : active) {
      // Advance rot = exp(i m theta) by repeated multiplication.
      while (at < m) {
        rot *= step;
        ++at;
      }
      const real term = (c[m] * rot).real();
      sum += (m == nyquist ? 1 : 2) * term;
    }
    out.values[j] = sum;
  }
  return out;
}

Profile operator+(const Profile& a, const Profile& b) {
  require_same_grid(a, b);
  Profile out(a.grid);
  for (std::size_t j = 0; j < a.size(); ++j) out.values[j] = a.values[j] + b.values[j];
  return out;
}

Profile operator-(const Profile& a, const Profile& b) {
  require_same_grid(a, b);
  Profile out(a.grid);
  for (std::size_t j = 0; j < a.size(); ++j) out.values[j] = a.values[j] - b.values[j];
  return out;
}

Profile operator*(real s, const Profile& a) {
  Profile out(a.grid);
  for (std::size_t j = 0; j < a.size(); ++j) out.values[j] = s * a.values[j];
  return out;
}

Profile pointwise_product(const Profile& a, const Profile& b) {
  require_same_grid(a, b);
  Profile out(a.grid);
  for (std::size_t j = 0; j < a.size(); ++j) out.values[j] = a.values[j] * b.values[j];
  return out;
}

}  // namespace hombridge
