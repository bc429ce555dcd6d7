#include <CLI11.hpp>

#include <iostream>

#include "hombridge/ctl.hpp"

using namespace hombridge;

namespace {

void add_nonlinearity(CLI::App* cmd, CtlOptions& o) {
  auto* f = cmd->add_option("--f", o.f, "nonlinear term f(u) as an expression in u");
  auto* b = cmd->add_option("--builtin", o.builtin, "built-in nonlinearity")
                ->check(CLI::IsMember({"piecewise", "exponential"}));
  f->excludes(b);
  cmd->add_option("--smoothing", o.max_smoothing, "log-sum-exp temperature for max/min (0 = off)");
  cmd->add_option("--search-max", o.search_max, "largest |u| scanned for L(f,c)");
}

void add_grid(CLI::App* cmd, CtlOptions& o) {
  cmd->add_option("--T", o.T, "half-length of the periodic domain [-T, T)");
  cmd->add_option("--n", o.n, "grid points (power of two >= 256)");
  cmd->add_option("--tol", o.tol, "Newton residual tolerance (sup-norm)");
  cmd->add_option("--seed-amplitude", o.seed_amplitude, "initial guess amplitude (default: ladder of multiples of L)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homoclinic travelling waves of u'''' + c^2 u'' + f(u) = 0: amplitude bound, solver, diagnostics"};
  app.require_subcommand(1);
  CtlOptions o;

  auto* bound = app.add_subcommand("bound", "print L(f,c), admissibility and tail parameters");
  add_nonlinearity(bound, o);
  bound->add_option("--c", o.c, "wave speed")->required();

  auto* solve = app.add_subcommand("solve", "compute one wave and run every diagnostic");
  add_nonlinearity(solve, o);
  add_grid(solve, o);
  solve->add_option("--c", o.c, "wave speed")->required();
  solve->add_option("--out", o.out, "solution file (JSON)");

  auto* sweep = app.add_subcommand("sweep", "continuation in c with one CSV row per wave");
  add_nonlinearity(sweep, o);
  add_grid(sweep, o);
  sweep->add_option("--c-start", o.c_start, "first speed (default 0.95 (4 f'(0))^(1/4), rounded)");
  sweep->add_option("--c-end", o.c_end, "last speed (< c-start)")->required();
  sweep->add_option("--step", o.step, "nominal continuation step in c");
  sweep->add_option("--min-step", o.min_step, "smallest step before the sweep stops early");
  sweep->add_option("--csv", o.csv, "CSV output (default: stdout)");
  sweep->add_option("--svg", o.svg, "SVG plot of amplitude and L against c");
  sweep->add_option("--threads", o.threads, "diagnostics workers (default: HOMBRIDGE_THREADS or all cores)");

  auto* check = app.add_subcommand("check", "sampled check of u f(u) > 0 and f'(0) > 0");
  add_nonlinearity(check, o);
  check->add_option("--c", o.c, "speed used to pick the default sampling range 10 L(f,c)");
  check->add_option("--u-max", o.u_max, "sampling range (default 10 L(f,c), else 100)");
  check->add_option("--samples", o.samples, "samples per sign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*bound) return run_bound(o, std::cout, std::cerr);
  if (*solve) return run_solve(o, std::cout, std::cerr);
  if (*sweep) return run_sweep(o, std::cout, std::cerr);
  return run_check(o, std::cout, std::cerr);
}
