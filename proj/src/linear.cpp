#include "linear.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

#include "fft.hpp"
#include "hombridge/error.hpp"

namespace hombridge::detail {

namespace {

using cvec = std::vector<std::complex<double>>;

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void symmetrize_in_place(std::vector<double>& v) {
  const std::size_t n = v.size();
  for (std::size_t j = 1; j < n / 2; ++j) {
    const double m = 0.5 * (v[j] + v[n - j]);
    v[j] = m;
    v[n - j] = m;
  }
}

double sign_alt(std::size_t m) { return (m % 2 == 0) ? 1.0 : -1.0; }

// Real cosine coefficients about s = 0, X_m = (-1)^m Re(FFT(x)_m), m = 0..n/2.
std::vector<double> centered_coefficients(const std::vector<double>& x) {
  cvec f(x.size() / 2 + 1);
  forward_fft(x, f);
  std::vector<double> out(f.size());
  for (std::size_t m = 0; m < f.size(); ++m) out[m] = sign_alt(m) * f[m].real();
  return out;
}

std::vector<double> from_centered(const std::vector<double>& coef, std::size_t n) {
  cvec f(coef.size());
  for (std::size_t m = 0; m < coef.size(); ++m) f[m] = sign_alt(m) * coef[m];
  std::vector<double> x(n);
  inverse_fft(f, x);
  for (double& v : x) v /= static_cast<double>(n);
  return x;
}

// Two-level preconditioner on the even subspace.
class Preconditioner {
 public:
  Preconditioner(const Grid& g, double c, const std::vector<double>& q, double f0,
                 const std::vector<double>& sigma)
      : n_(g.size()), f0_(f0), sigma_(sigma) {
    double spread = 0;
    for (double v : q) spread = std::max(spread, std::abs(v - f0));
    const double c2 = c * c;
    const double xi_c = std::max(3.0, std::sqrt(0.5 * (c2 + std::sqrt(c2 * c2 + 40.0 * spread))));
    const double T = g.half_length();
    low_ = std::min<std::size_t>(static_cast<std::size_t>(xi_c * T / M_PI), n_ / 2 - 1);

    const auto qhat = centered_coefficients(q);
    auto Q = [&](long idx) {
      auto m = static_cast<std::size_t>(std::abs(idx)) % n_;
      if (m > n_ / 2) m = n_ - m;
      return qhat[m];
    };
    const double inv_n = 1.0 / static_cast<double>(n_);
    Eigen::MatrixXd J(low_ + 1, low_ + 1);
    for (std::size_t k = 0; k <= low_; ++k) {
      for (std::size_t p = 0; p <= low_; ++p) {
        const long kk = static_cast<long>(k), pp = static_cast<long>(p);
        J(k, p) = p == 0 ? inv_n * Q(kk) : inv_n * (Q(kk - pp) + Q(kk + pp));
      }
      J(k, k) += sigma_[k];
    }
    lu_.compute(J);
  }

  /// Coefficients X = M^{-1} r together with sigma * X, where for high modes
  /// sigma * X is formed as r - f0 X so no large symbol multiplies a
  /// rounded quantity.
  void apply(const std::vector<double>& r, std::vector<double>& x_coef,
             std::vector<double>& sigma_x) const {
    const auto rhat = centered_coefficients(r);
    x_coef.assign(rhat.size(), 0.0);
    sigma_x.assign(rhat.size(), 0.0);
    Eigen::VectorXd rl(low_ + 1);
    for (std::size_t k = 0; k <= low_; ++k) rl[k] = rhat[k];
    const Eigen::VectorXd xl = lu_.solve(rl);
    for (std::size_t k = 0; k <= low_; ++k) {
      x_coef[k] = xl[k];
      sigma_x[k] = sigma_[k] * xl[k];
    }
    for (std::size_t k = low_ + 1; k < rhat.size(); ++k) {
      x_coef[k] = rhat[k] / (sigma_[k] + f0_);
      sigma_x[k] = rhat[k] - f0_ * x_coef[k];
    }
  }

  std::size_t low_modes() const { return low_ + 1; }

 private:
  std::size_t n_;
  double f0_;
  const std::vector<double>& sigma_;
  std::size_t low_ = 0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace

EvenJacobian::EvenJacobian(const Grid& grid, double c, std::vector<double> q, double fprime0)
    : grid_(grid), c_(c), q_(std::move(q)), fprime0_(fprime0) {
  if (q_.size() != grid_.size()) throw InvalidArgument("Jacobian diagonal has the wrong length");
  sigma_.resize(grid_.size() / 2 + 1);
  for (std::size_t m = 0; m < sigma_.size(); ++m) {
    const double xi = static_cast<double>(grid_.wavenumber(m));
    sigma_[m] = xi * xi * (xi * xi - c_ * c_);
  }
}

std::vector<double> EvenJacobian::apply(const std::vector<double>& x) const {
  const std::size_t n = grid_.size();
  cvec f(n / 2 + 1);
  forward_fft(x, f);
  for (std::size_t m = 0; m < f.size(); ++m) f[m] *= sigma_[m];
  std::vector<double> y(n);
  inverse_fft(f, y);
  for (std::size_t j = 0; j < n; ++j) y[j] = y[j] / static_cast<double>(n) + q_[j] * x[j];
  return y;
}

LinearSolveResult EvenJacobian::solve_dense(const std::vector<double>& rhs) const {
  const std::size_t n = grid_.size();
  const std::size_t half = n / 2;

  // Circulant kernel of L_c in grid space.
  cvec f(sigma_.begin(), sigma_.end());
  std::vector<double> kernel(n);
  inverse_fft(f, kernel);
  for (double& v : kernel) v /= static_cast<double>(n);
  auto C = [&](long d) { return kernel[static_cast<std::size_t>(((d % (long)n) + (long)n) % (long)n)]; };

  Eigen::MatrixXd A(half + 1, half + 1);
  Eigen::VectorXd b(half + 1);
  for (std::size_t i = 0; i <= half; ++i) {
    const long ii = static_cast<long>(i);
    for (std::size_t k = 0; k <= half; ++k) {
      const long kk = static_cast<long>(k);
      A(i, k) = (k == 0 || k == half) ? C(ii - kk) : C(ii - kk) + C(ii + kk);
    }
    A(i, i) += q_[i];
    b[i] = 0.5 * (rhs[i] + rhs[(n - i) % n]);
  }
  const Eigen::VectorXd z = A.partialPivLu().solve(b);

  LinearSolveResult out;
  out.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.x[j] = z[j <= half ? j : n - j];
  const double bn = b.norm();
  out.relative_residual = bn > 0 ? (A * z - b).norm() / bn : 0.0;
  out.ok = z.allFinite();
  out.iterations = 1;
  return out;
}

LinearSolveResult EvenJacobian::solve_gmres(const std::vector<double>& rhs, double rel_tol,
                                            int max_iterations, int restart) const {
  const std::size_t n = grid_.size();
  LinearSolveResult out;

  // An odd rounding component of b lies outside the range of the
  // even-restricted operator and would stall the iteration.
  std::vector<double> b = rhs;
  symmetrize_in_place(b);
  const double bnorm = norm2(b);
  if (bnorm == 0) {
    out.x.assign(n, 0.0);
    out.ok = true;
    return out;
  }

  const Preconditioner prec(grid_, c_, q_, fprime0_, sigma_);
  std::vector<double> xc, sx;
  auto op = [&](const std::vector<double>& v) {
    prec.apply(v, xc, sx);
    const auto x = from_centered(xc, n);
    auto y = from_centered(sx, n);
    for (std::size_t j = 0; j < n; ++j) y[j] += q_[j] * x[j];
    symmetrize_in_place(y);
    return y;
  };

  std::vector<double> y(n, 0.0);
  std::vector<double> r = b;
  int total = 0;
  double rel = 1.0;
  const int m = std::max(1, restart);

  while (true) {
    const double beta = norm2(r);
    rel = beta / bnorm;
    if (rel <= rel_tol || total >= max_iterations) break;

    std::vector<std::vector<double>> V(m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m), sn(m), g(m + 1, 0.0);
    g[0] = beta;
    V[0] = r;
    for (double& v : V[0]) v /= beta;

    int k = 0;
    for (int j = 0; j < m && total < max_iterations; ++j) {
      auto w = op(V[j]);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double h = dot(w, V[i]);
          H(i, j) += h;
          for (std::size_t t = 0; t < n; ++t) w[t] -= h * V[i][t];
        }
      }
      const double hn = norm2(w);
      H(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        const double tmp = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = tmp;
      }
      const double den = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = den > 0 ? H(j, j) / den : 1.0;
      sn[j] = den > 0 ? H(j + 1, j) / den : 0.0;
      H(j, j) = den;
      H(j + 1, j) = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++total;
      k = j + 1;
      if (std::abs(g[j + 1]) / bnorm <= rel_tol || hn == 0) break;
      V[j + 1] = std::move(w);
      for (double& v : V[j + 1]) v /= hn;
    }

    // Back substitution for the Krylov combination.
    std::vector<double> z(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int t = i + 1; t < k; ++t) s -= H(i, t) * z[t];
      z[i] = H(i, i) != 0 ? s / H(i, i) : 0.0;
    }
    for (int i = 0; i < k; ++i)
      for (std::size_t t = 0; t < n; ++t) y[t] += z[i] * V[i][t];

    const auto Ay = op(y);
    for (std::size_t t = 0; t < n; ++t) r[t] = b[t] - Ay[t];
  }

  prec.apply(y, xc, sx);
  out.x = from_centered(xc, n);
  symmetrize_in_place(out.x);
  out.relative_residual = rel;
  out.iterations = total;
  out.ok = rel <= rel_tol;
  for (double v : out.x)
    if (!std::isfinite(v)) out.ok = false;
  return out;
}

}  // namespace hombridge::detail
