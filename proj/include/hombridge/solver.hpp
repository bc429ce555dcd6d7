#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hombridge/bound.hpp"
#include "hombridge/nonlinearity.hpp"
#include "hombridge/spectral.hpp"

namespace hombridge {

enum class LinearSolverKind { Auto, Dense, Iterative };

struct SolverConfig {
  double newton_tol = 1e-10;  // residual sup-norm
  int max_newton_iters = 50;
  double damping = 0.5;       // backtracking factor
  double min_step = 1.0 / 64;
  int max_growth_steps = 3;   // consecutive residual increases before giving up
  double collapse_fraction = 1e-3;
  double tail_tol = 1e-8;
  double continuation_step = 0.025;
  double min_continuation_step = 1e-4;
  LinearSolverKind linear_solver = LinearSolverKind::Auto;
  std::size_t dense_max_n = 2048;
  double linear_tol = 1e-12;
  /// Seed amplitudes as multiples of L(f,c), tried in order, each with a
  /// trough (negative) and then a crest (positive) guess.
  std::vector<double> seed_factors = {1.5, 0.75, 3.0, 6.0};

  /// Throws InvalidArgument on non-positive tolerances or iteration counts.
  void validate() const;
};

enum class SolveStatus { Converged, Trivial, Diverged, MaxIterations, LinearSolverFailure };

const char* to_string(SolveStatus s);

struct WaveProfile {
  Profile profile;
  double c = 0.0;
  double residual_norm = 0.0;
  int newton_iters = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  std::string message;
  double seed_amplitude = 0.0;  // signed: negative for trough-centred guesses

  /// max |u(+-T)|; both ends are the grid point s_0 = -T by periodicity.
  double boundary_value() const;
};

/// u'''' + c^2 u'' + f(u) on the grid. Throws DomainError naming the grid
/// index where f could not be evaluated.
Profile residual(const NonlinearitySpec& spec, double c, const Profile& p);

/// Trough-centred seed -A exp(-rho s tanh(omega s)) cos(omega s) built from
/// the linearized tail roots: even, sup-norm A, decaying like exp(-rho |s|).
Profile initial_guess(const NonlinearitySpec& spec, double c, const Grid& grid, double amplitude);

/// Damped Newton on even profiles. Never throws for numerical failure; the
/// outcome is reported through status/message.
WaveProfile newton_solve(const NonlinearitySpec& spec, double c, const Profile& guess,
                         const SolverConfig& cfg = {});

/// newton_solve from initial_guess over the seed ladder (or only the given
/// amplitude, both signs, when seed_amplitude is set). Returns the first
/// nontrivial converged wave, else the last failed attempt.
WaveProfile solve_wave(const NonlinearitySpec& spec, double c, const Grid& grid,
                       const SolverConfig& cfg = {},
                       std::optional<double> seed_amplitude = std::nullopt);

struct ContinuationResult {
  std::vector<WaveProfile> waves;  // converged waves in order of decreasing c
  bool aborted = false;            // step size fell below its floor
  double last_good_c = 0.0;
  std::string message;
};

/// Natural-parameter continuation downward in c from a solve_wave at c_start.
/// Regrids (T and n doubled) when the tail is not resolved by the domain.
/// Throws SolverFailure if the first solve fails and InvalidArgument unless
/// c_end < c_start.
ContinuationResult continue_in_c(const NonlinearitySpec& spec, double c_start, double c_end,
                                 const SolverConfig& cfg = {}, const Grid& grid = Grid(100.0, 4096),
                                 std::optional<double> seed_amplitude = std::nullopt);

}  // namespace hombridge
