#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "hombridge/error.hpp"

namespace hombridge {

/// Working precision for sampled profiles. Fourth derivatives amplify
/// rounding of the samples by up to xi^4, so samples are kept in extended
/// precision; linear algebra runs in double.
using real = long double;

/// Coefficients with |c_m| <= kSpectralNoiseFloor * max|c| are treated as
/// rounding noise and dropped before differentiation.
inline constexpr real kSpectralNoiseFloor = 1e-18L;

/// Uniform periodic grid s_j = -T + j (2T/n) on [-T, T).
class Grid {
 public:
  Grid() = default;
  /// T > 0; n a power of two >= 256.
  Grid(double half_length, std::size_t n);

  double half_length() const { return half_length_; }
  std::size_t size() const { return n_; }
  real spacing() const { return 2.0L * half_length_ / static_cast<real>(n_); }
  real point(std::size_t j) const { return -static_cast<real>(half_length_) + j * spacing(); }
  /// Angular wavenumber pi m / T of Fourier index m.
  real wavenumber(std::size_t m) const { return pi() * static_cast<real>(m) / half_length_; }
  /// Grid index nearest to s (wrapped into [0, n)).
  std::size_t nearest_index(real s) const;
  /// Index of the mirror point -s_j, i.e. (n - j) mod n.
  std::size_t mirror(std::size_t j) const { return (n_ - j) % n_; }
  std::size_t center_index() const { return n_ / 2; }

  static constexpr real pi() { return 3.141592653589793238462643383279502884L; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double half_length_ = 1.0;
  std::size_t n_ = 0;
};

/// Samples of a function on a Grid.
struct Profile {
  Grid grid;
  std::vector<real> values;

  Profile() = default;
  explicit Profile(const Grid& g) : grid(g), values(g.size(), 0.0L) {}
  Profile(const Grid& g, std::vector<real> v);

  std::size_t size() const { return values.size(); }
  real sup_norm() const;
};

/// Evaluate f at every grid point.
template <class F>
Profile sample(const Grid& g, F&& f) {
  Profile p(g);
  for (std::size_t j = 0; j < g.size(); ++j) p.values[j] = f(g.point(j));
  return p;
}

/// Spectral derivative of order 1..4: multiply mode m by (i xi_m)^k, with the
/// Nyquist mode zeroed for odd k and noise-level coefficients dropped.
Profile derivative(const Profile& p, int order, real noise_floor = kSpectralNoiseFloor);

/// u'''' + c^2 u'' in one transform (symbol xi^4 - c^2 xi^2), with the same
/// noise floor as derivative().
Profile beam_operator(const Profile& p, double c, real noise_floor = kSpectralNoiseFloor);

/// Normalized Fourier coefficients c_m = (1/n) sum_j u_j exp(-2 pi i j m / n), m = 0..n/2.
std::vector<std::complex<real>> fourier_coefficients(const Profile& p);

/// h * sum of the samples: the full-period integral.
real quadrature(const Profile& p);

/// Composite Simpson on [s1, s2] with both ends snapped to the nearest grid
/// points (3/8 rule on the last three panels when the panel count is odd).
real quadrature_between(const Profile& p, real s1, real s2);

/// Same rule between grid indices i1 < i2 (i2 may equal n, meaning s = T).
real quadrature_indices(const Profile& p, std::size_t i1, std::size_t i2);

/// max over xi of c^2 xi^2 - xi^4, found on successively refined xi-grids.
double multiplier_max(double c);

/// Average of p with its reflection s -> -s.
Profile symmetrize(const Profile& p);

/// max_j |u(s_j) - u(-s_j)|.
real evenness_defect(const Profile& p);

/// Trigonometric interpolant of p evaluated on another grid; zero outside
/// the original period.
Profile resample(const Profile& p, const Grid& target);

// Elementwise helpers used across modules.
Profile operator+(const Profile& a, const Profile& b);
Profile operator-(const Profile& a, const Profile& b);
Profile operator*(real s, const Profile& a);
Profile pointwise_product(const Profile& a, const Profile& b);

}  // namespace hombridge
