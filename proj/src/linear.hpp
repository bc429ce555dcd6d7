#pragma once

// Newton linear systems (L_c + diag(q)) x = b restricted to profiles that are
// even about s = 0. L_c has Fourier symbol xi^4 - c^2 xi^2.

#include <cstddef>
#include <vector>

#include "hombridge/spectral.hpp"

namespace hombridge::detail {

struct LinearSolveResult {
  std::vector<double> x;
  bool ok = false;
  double relative_residual = 0.0;
  int iterations = 0;
};

class EvenJacobian {
 public:
  /// q is f'(u) on the grid; fprime0 scales the high-mode preconditioner.
  EvenJacobian(const Grid& grid, double c, std::vector<double> q, double fprime0);

  /// LU on the (n/2+1)-dimensional reduced system.
  LinearSolveResult solve_dense(const std::vector<double>& rhs) const;

  /// Right-preconditioned restarted GMRES. The preconditioner solves the
  /// low even cosine modes exactly and scales the rest by 1/(sigma + f'(0)).
  LinearSolveResult solve_gmres(const std::vector<double>& rhs, double rel_tol,
                                int max_iterations = 600, int restart = 60) const;

  /// Apply the operator to a grid vector (test helper; amplifies rounding
  /// noise in x by up to max sigma).
  std::vector<double> apply(const std::vector<double>& x) const;

 private:
  Grid grid_;
  double c_;
  std::vector<double> q_;
  double fprime0_;
  std::vector<double> sigma_;  // symbol per Fourier index 0..n/2
};

}  // namespace hombridge::detail
