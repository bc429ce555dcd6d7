#include "hombridge/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hombridge/error.hpp"
#include "linear.hpp"

namespace hombridge {

namespace {

constexpr std::size_t kMaxGridSize = std::size_t{1} << 20;
constexpr std::size_t kMinGridSize = 256;
constexpr int kMaxRegrids = 4;
constexpr double kMinPointsPerOscillation = 16.0;

struct Evaluated {
  Profile r;
  double norm = 0.0;
};

std::optional<Evaluated> try_residual(const NonlinearitySpec& spec, double c, const Profile& u) {
  try {
    Evaluated e{residual(spec, c, u), 0.0};
    e.norm = static_cast<double>(e.r.sup_norm());
    if (!std::isfinite(e.norm)) return std::nullopt;
    return e;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool use_dense(const SolverConfig& cfg, std::size_t n) {
  switch (cfg.linear_solver) {
    case LinearSolverKind::Dense:
      return true;
    case LinearSolverKind::Iterative:
      return false;
    case LinearSolverKind::Auto:
      break;
  }
  return n <= cfg.dense_max_n;
}

// Inexact steps from a GMRES run that missed its target are still useful
// Newton directions as long as they are this accurate.
constexpr double kUsableLinearResidual = 1e-6;

}  // namespace

void SolverConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be positive");
  };
  positive(newton_tol, "newton_tol");
  positive(tail_tol, "tail_tol");
  positive(continuation_step, "continuation_step");
  positive(min_continuation_step, "min_continuation_step");
  positive(linear_tol, "linear_tol");
  positive(collapse_fraction, "collapse_fraction");
  if (max_newton_iters < 1) throw InvalidArgument("max_newton_iters must be >= 1");
  if (max_growth_steps < 1) throw InvalidArgument("max_growth_steps must be >= 1");
  if (!(damping > 0 && damping < 1)) throw InvalidArgument("damping must lie in (0, 1)");
  if (!(min_step > 0 && min_step <= 1)) throw InvalidArgument("min_step must lie in (0, 1]");
  if (seed_factors.empty()) throw InvalidArgument("seed_factors must not be empty");
  for (double f : seed_factors) positive(f, "seed factor");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::Trivial:
      return "trivial";
    case SolveStatus::Diverged:
      return "diverged";
    case SolveStatus::MaxIterations:
      return "max-iterations";
    case SolveStatus::LinearSolverFailure:
      return "linear-solver-failure";
  }
  return "unknown";
}

double WaveProfile::boundary_value() const {
  if (profile.values.empty()) return 0.0;
  return static_cast<double>(std::abs(profile.values.front()));
}

Profile residual(const NonlinearitySpec& spec, double c, const Profile& p) {
  Profile r = beam_operator(p, c);
  for (std::size_t j = 0; j < p.size(); ++j) {
    try {
      r.values[j] += spec.value(p.values[j]);
    } catch (const DomainError& e) {
      std::ostringstream msg;
      msg << e.what() << " at grid index " << j << " (s = " << static_cast<double>(p.grid.point(j))
          << ", u = " << static_cast<double>(p.values[j]) << ")";
      throw DomainError(msg.str());
    }
  }
  return r;
}

Profile initial_guess(const NonlinearitySpec& spec, double c, const Grid& grid, double amplitude) {
  if (!(amplitude > 0) || !std::isfinite(amplitude))
    throw InvalidArgument("seed amplitude must be positive");
  const auto tp = tail_parameters(spec, c);
  const real rho = tp.rho, omega = tp.omega, A = amplitude;
  // s tanh(omega s) is a smooth stand-in for |s|; the kink of |s| would make
  // the spectral derivatives ring over the whole domain.
  Profile p = sample(grid, [&](real s) {
    return -A * std::exp(-rho * s * std::tanh(omega * s)) * std::cos(omega * s);
  });
  return symmetrize(p);
}

WaveProfile newton_solve(const NonlinearitySpec& spec, double c, const Profile& guess,
                         const SolverConfig& cfg) {
  cfg.validate();
  require_admissible(spec, c);
  const real scale = std::max<real>(1, guess.sup_norm());
  if (evenness_defect(guess) > 1e-9L * scale)
    throw InvalidArgument("Newton guess must be even about s = 0");

  WaveProfile w;
  w.c = c;
  w.profile = symmetrize(guess);

  const auto bound = lower_bound_L(spec, c);
  const double reference = bound.value ? *bound.value : static_cast<double>(guess.sup_norm());
  const double collapse_level = cfg.collapse_fraction * reference;
  const double f0 = spec.fprime_at_zero();
  const std::size_t n = guess.size();

  auto current = try_residual(spec, c, w.profile);
  if (!current) {
    w.status = SolveStatus::Diverged;
    w.message = "residual of the initial guess is not finite";
    w.residual_norm = INFINITY;
    return w;
  }

  int growth = 0;
  for (int it = 0;; ++it) {
    w.residual_norm = current->norm;
    w.newton_iters = it;
    if (static_cast<double>(w.profile.sup_norm()) < collapse_level) {
      w.status = SolveStatus::Trivial;
      w.message = "collapsed to zero (sup-norm below " + format_double(collapse_level) + ")";
      return w;
    }
    if (current->norm <= cfg.newton_tol) {
      w.status = SolveStatus::Converged;
      w.converged = true;
      w.message = "converged in " + std::to_string(it) + " Newton iterations";
      return w;
    }
    if (it >= cfg.max_newton_iters) {
      w.status = SolveStatus::MaxIterations;
      w.message = "no convergence after " + std::to_string(it) + " Newton iterations (residual " +
                  format_double(current->norm) + ")";
      return w;
    }

    std::vector<double> q(n), rhs(n);
    try {
      for (std::size_t j = 0; j < n; ++j) {
        q[j] = static_cast<double>(spec.derivative(w.profile.values[j]));
        rhs[j] = -static_cast<double>(current->r.values[j]);
      }
    } catch (const DomainError& e) {
      w.status = SolveStatus::Diverged;
      w.message = std::string("Jacobian not finite: ") + e.what();
      return w;
    }

    const detail::EvenJacobian J(w.profile.grid, c, std::move(q), f0);
    const auto lin = use_dense(cfg, n) ? J.solve_dense(rhs) : J.solve_gmres(rhs, cfg.linear_tol);
    const bool usable = lin.ok || (std::isfinite(lin.relative_residual) &&
                                   lin.relative_residual <= kUsableLinearResidual);
    if (!usable) {
      w.status = SolveStatus::LinearSolverFailure;
      w.message = "linear solve failed (relative residual " + format_double(lin.relative_residual) +
                  " after " + std::to_string(lin.iterations) + " iterations)";
      return w;
    }

    // Backtracking on the residual sup-norm.
    std::optional<Evaluated> trial_eval;
    Profile trial;
    bool accepted = false;
    for (real step = 1;; step *= static_cast<real>(cfg.damping)) {
      trial = Profile(w.profile.grid);
      for (std::size_t j = 0; j < n; ++j)
        trial.values[j] = w.profile.values[j] + step * static_cast<real>(lin.x[j]);
      trial = symmetrize(trial);
      trial_eval = try_residual(spec, c, trial);
      if (trial_eval && trial_eval->norm < current->norm) {
        accepted = true;
        break;
      }
      if (step * static_cast<real>(cfg.damping) < static_cast<real>(cfg.min_step) * (1 - 1e-12L)) break;
    }

    if (!trial_eval) {
      w.status = SolveStatus::Diverged;
      w.message = "residual not finite even at the smallest damped step";
      return w;
    }
    growth = accepted ? 0 : growth + 1;
    w.profile = std::move(trial);
    current = std::move(trial_eval);
    if (growth >= cfg.max_growth_steps) {
      w.residual_norm = current->norm;
      w.newton_iters = it + 1;
      w.status = SolveStatus::Diverged;
      w.message = "residual grew for " + std::to_string(growth) + " consecutive damped steps";
      return w;
    }
  }
}

WaveProfile solve_wave(const NonlinearitySpec& spec, double c, const Grid& grid,
                       const SolverConfig& cfg, std::optional<double> seed_amplitude) {
  cfg.validate();
  require_admissible(spec, c);

  std::vector<double> amplitudes;
  if (seed_amplitude) {
    if (!(*seed_amplitude > 0)) throw InvalidArgument("seed amplitude must be positive");
    amplitudes.push_back(*seed_amplitude);
  } else {
    const auto bound = lower_bound_L(spec, c);
    const double base = bound.value.value_or(1.0);
    for (double f : cfg.seed_factors) amplitudes.push_back(f * base);
  }

  WaveProfile last;
  int trivial = 0, other = 0;
  for (double A : amplitudes) {
    const Profile trough = initial_guess(spec, c, grid, A);
    for (real sign : {1.0L, -1.0L}) {
      WaveProfile w = newton_solve(spec, c, sign * trough, cfg);
      w.seed_amplitude = -static_cast<double>(sign) * A;
      if (w.converged) return w;
      (w.status == SolveStatus::Trivial ? trivial : other) += 1;
      last = std::move(w);
    }
  }
  std::ostringstream msg;
  msg << "no nontrivial wave from " << 2 * amplitudes.size() << " seeds (" << trivial
      << " collapsed to zero, " << other << " failed otherwise); last attempt: " << last.message;
  if (other == 0) last.status = SolveStatus::Trivial;
  last.message = msg.str();
  return last;
}

namespace {

// Largest |u| at |s| >= s_min.
double tail_max(const Profile& p, double s_min) {
  real m = 0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (std::abs(p.grid.point(j)) >= s_min) m = std::max(m, std::abs(p.values[j]));
  return static_cast<double>(m);
}

// Re-solve on a larger or finer grid until the tail fits the domain and the
// tail oscillation is resolved. When the whole outer half of the domain is
// already below tail_tol, halve T and n instead (same spacing): otherwise the
// outer tail consists of rounding noise for fast-decaying waves.
WaveProfile fit_domain(const NonlinearitySpec& spec, WaveProfile w, const SolverConfig& cfg) {
  const double omega = tail_parameters(spec, w.c).omega;
  for (int round = 0; round < kMaxRegrids; ++round) {
    const Grid& g = w.profile.grid;
    const bool tail_cut = w.boundary_value() > 10 * cfg.tail_tol;
    const double points_per_osc = 2 * M_PI / (omega * static_cast<double>(g.spacing()));
    const bool coarse = points_per_osc < kMinPointsPerOscillation;
    if (tail_cut || coarse) {
      const std::size_t n = g.size() * 2;
      if (n > kMaxGridSize) break;
      const Grid next(tail_cut ? 2 * g.half_length() : g.half_length(), n);
      WaveProfile again = newton_solve(spec, w.c, resample(w.profile, next), cfg);
      if (!again.converged) break;
      again.seed_amplitude = w.seed_amplitude;
      w = std::move(again);
      continue;
    }
    const double half = 0.5 * g.half_length();
    if (g.size() / 2 < kMinGridSize || tail_max(w.profile, half - M_PI / omega) > cfg.tail_tol) break;
    WaveProfile again = newton_solve(spec, w.c, resample(w.profile, Grid(half, g.size() / 2)), cfg);
    if (!again.converged || again.boundary_value() > 10 * cfg.tail_tol) break;
    again.seed_amplitude = w.seed_amplitude;
    w = std::move(again);
  }
  return w;
}

}  // namespace

ContinuationResult continue_in_c(const NonlinearitySpec& spec, double c_start, double c_end,
                                 const SolverConfig& cfg, const Grid& grid,
                                 std::optional<double> seed_amplitude) {
  cfg.validate();
  if (!(c_end < c_start)) throw InvalidArgument("continuation needs c_end < c_start");
  if (!(c_end > 0)) throw InvalidArgument("continuation needs c_end > 0");
  require_admissible(spec, c_start);

  ContinuationResult out;
  WaveProfile first = solve_wave(spec, c_start, grid, cfg, seed_amplitude);
  if (!first.converged)
    throw SolverFailure("initial solve at c = " + format_double(c_start) + " failed: " + first.message);
  out.waves.push_back(fit_domain(spec, std::move(first), cfg));

  const double nominal = cfg.continuation_step;
  double dc = nominal;
  const double snap = 1e-9 * nominal;
  while (out.waves.back().c > c_end) {
    const WaveProfile& prev = out.waves.back();
    // Rounded to 1e-12 so that repeated steps do not accumulate drift.
    double c_next = std::round((prev.c - dc) * 1e12) / 1e12;
    if (c_next < c_end + snap) c_next = c_end;

    // Secant predictor when the last two waves share a grid.
    std::optional<Profile> predicted;
    if (out.waves.size() >= 2) {
      const WaveProfile& older = out.waves[out.waves.size() - 2];
      if (older.profile.grid == prev.profile.grid) {
        const real t = static_cast<real>((c_next - prev.c) / (prev.c - older.c));
        predicted = prev.profile + t * (prev.profile - older.profile);
      }
    }

    WaveProfile w;
    if (predicted) w = newton_solve(spec, c_next, *predicted, cfg);
    if (!w.converged) w = newton_solve(spec, c_next, prev.profile, cfg);

    if (w.converged) {
      w.seed_amplitude = prev.seed_amplitude;
      out.waves.push_back(fit_domain(spec, std::move(w), cfg));
      dc = std::min(nominal, 2 * dc);
      continue;
    }
    dc *= 0.5;
    if (dc < cfg.min_continuation_step) {
      out.aborted = true;
      out.message = "step size fell below " + format_double(cfg.min_continuation_step) +
                    " going below c = " + format_double(prev.c) + ": " + w.message;
      break;
    }
  }
  out.last_good_c = out.waves.back().c;
  return out;
}

}  // namespace hombridge
