// One PASS/FAIL line per acceptance criterion. Exit status 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "hombridge/ctl.hpp"
#include "oracles.hpp"

using namespace hombridge;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const double kSpeeds[] = {0.7, 0.9, 1.0, 1.2, 1.35};

Outcome piecewise_bound() {
  const auto pw = NonlinearitySpec::piecewise();
  double worst = 0, worst_scan = 0, lib_seconds = 0;
  for (double c : kSpeeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = lower_bound_L(pw, c);
    lib_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.value) return {false, "L unbounded at c = " + fmt("%g", c)};
    const double exact = 4 / std::pow(c, 4);
    const double scan = oracle::brute_force_bound([](double u) { return std::max(u, -1.0); }, std::pow(c, 4) / 4, 100.0);
    worst = std::max(worst, rel(*r.value, exact));
    worst_scan = std::max(worst_scan, rel(*r.value, scan));
  }
  return {worst <= 1e-9 && worst_scan <= 1e-9 && lib_seconds < 1,
          "max rel err vs 4/c^4 " + fmt("%.2e", worst) + ", vs 1e7-point scan " + fmt("%.2e", worst_scan) +
              ", library time " + fmt("%.3f s", lib_seconds)};
}

Outcome exponential_bound() {
  const auto ex = NonlinearitySpec::exponential();
  double worst = 0, worst_eq = 0;
  for (double c : kSpeeds) {
    const auto r = lower_bound_L(ex, c);
    if (!r.value) return {false, "L unbounded at c = " + fmt("%g", c)};
    const double d = *r.value, t = std::pow(c, 4) / 4;
    worst = std::max(worst, rel(d, oracle::exponential_bound(c)));
    worst_eq = std::max(worst_eq, std::abs(-std::expm1(-d) / d - t) / t);
  }
  return {worst <= 1e-9 && worst_eq <= 1e-9,
          "max rel err vs bisection " + fmt("%.2e", worst) + ", equation residual " + fmt("%.2e", worst_eq)};
}

Outcome multiplier() {
  std::mt19937_64 rng(20261019);
  std::uniform_real_distribution<double> dist(0.05, 3.0);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const double c = dist(rng);
    worst = std::max(worst, rel(multiplier_max(c), std::pow(c, 4) / 4));
  }
  return {worst <= 1e-12, "50 random c, max rel err " + fmt("%.2e", worst)};
}

Outcome analytic_sine() {
  const auto lin = NonlinearitySpec::parse("u");
  const double c = std::sqrt(2.0);
  const Grid g(std::acos(-1.0), 256);
  // T is pi rounded to double; the exact ratio keeps sin periodic on the grid.
  const real k = Grid::pi() / g.half_length();
  const Profile u = sample(g, [k](real s) { return std::sin(k * s); });
  const double res = static_cast<double>(residual(lin, c, u).sup_norm());
  const double q = std::acos(-1.0) / 4;
  const double dH = hamiltonian_H(u, c, q) - hamiltonian_H(u, c, 0.0);
  const double id6 = verify_identity6(u, lin, c, 0.0, q);
  const auto e8 = verify_estimate8(u, lin, c);
  const bool ok = res <= 1e-10 && id6 <= 1e-6 && std::abs(dH + 1) <= 1e-10 && e8.identity_residual <= 1e-10 &&
                  std::abs(e8.inequality_slack) <= 1e-10;
  return {ok, "residual " + fmt("%.2e", res) + ", dH " + fmt("%.12f", dH) + ", identity on [0, pi/4] " +
                  fmt("%.2e", id6) + ", energy identity " + fmt("%.2e", e8.identity_residual) + ", slack " +
                  fmt("%.2e", e8.inequality_slack)};
}

WaveProfile solve13() {
  static const WaveProfile w = solve_wave(NonlinearitySpec::exponential(), 1.3, Grid(100.0, 4096));
  return w;
}

Outcome end_to_end() {
  const auto ex = NonlinearitySpec::exponential();
  const WaveProfile w = solve13();
  if (!w.converged) return {false, "no convergence: " + w.message};
  const auto r = diagnose(w, ex);
  const double L = oracle::exponential_bound(1.3);
  const bool ok = w.residual_norm <= 1e-10 && r.amplitude > L && r.overall_pass;
  return {ok, "residual " + fmt("%.2e", w.residual_norm) + ", amplitude " + fmt("%.10f", r.amplitude) + " > L " +
                  fmt("%.10f", L) + ", report " + (r.overall_pass ? "passes" : "fails")};
}

struct SweepData {
  ContinuationResult result;
  std::vector<DiagnosticsReport> reports;
};

const SweepData& sweep() {
  static const SweepData d = [] {
    const auto ex = NonlinearitySpec::exponential();
    SweepData s{continue_in_c(ex, 1.35, 0.8), {}};
    for (const auto& w : s.result.waves) s.reports.push_back(diagnose(w, ex));
    return s;
  }();
  return d;
}

Outcome blow_up() {
  const auto& s = sweep();
  const auto& waves = s.result.waves;
  bool above = true, increasing = true;
  double a13 = NAN, a08 = NAN;
  for (std::size_t k = 0; k < waves.size(); ++k) {
    const auto& r = s.reports[k];
    above &= r.lower_bound && r.amplitude > *r.lower_bound;
    if (k > 0) increasing &= waves[k].c < waves[k - 1].c && r.amplitude > s.reports[k - 1].amplitude;
    if (std::abs(waves[k].c - 1.3) < 1e-9) a13 = r.amplitude;
    if (std::abs(waves[k].c - 0.8) < 1e-9) a08 = r.amplitude;
  }
  const double L_ratio = oracle::exponential_bound(0.8) / oracle::exponential_bound(1.3);
  const double ratio = a08 / a13;
  const bool ok = !s.result.aborted && waves.size() >= 20 && above && increasing && ratio >= 3 && L_ratio >= 3;
  return {ok, std::to_string(waves.size()) + " waves, all above L: " + (above ? "yes" : "no") +
                  ", strictly increasing: " + (increasing ? "yes" : "no") + ", amp(0.8)/amp(1.3) " +
                  fmt("%.3f", ratio) + " (L ratio " + fmt("%.3f", L_ratio) + ")"};
}

Outcome tail_diagnostics() {
  const auto& s = sweep();
  if (s.reports.empty()) return {false, "no waves"};
  std::size_t min_sc = SIZE_MAX;
  double max_boundary = 0, max_rate_err = 0;
  bool ok = true;
  for (const auto& r : s.reports) {
    min_sc = std::min({min_sc, r.sign_changes_left, r.sign_changes_right});
    for (double b : r.decay.boundary_max) max_boundary = std::max(max_boundary, b);
    if (!r.decay.fitted_rate) {
      ok = false;
      continue;
    }
    max_rate_err = std::max(max_rate_err, rel(*r.decay.fitted_rate, r.decay.expected_rate));
  }
  ok = ok && min_sc >= 4 && max_boundary <= 1e-6 && max_rate_err <= 0.10;
  return {ok, "min sign changes per tail " + std::to_string(min_sc) + ", max boundary derivative " +
                  fmt("%.2e", max_boundary) + ", max decay-rate error " + fmt("%.2f%%", 100 * max_rate_err)};
}

Outcome linear_collapse() {
  const auto lin = NonlinearitySpec::parse("u");
  if (!nonexistence_predicate(lin, 1.0)) return {false, "nonexistence predicate is false"};
  const Grid g(100.0, 4096);
  int trivial = 0, diverged = 0, converged = 0;
  for (int k = 0; k < 10; ++k) {
    const double A = 1e-3 * std::pow(10.0, 0.5 * k);  // 1e-3 .. ~32
    for (real sign : {1.0L, -1.0L}) {
      const WaveProfile w = newton_solve(lin, 1.0, sign * initial_guess(lin, 1.0, g, A));
      if (w.converged)
        ++converged;
      else if (w.status == SolveStatus::Trivial)
        ++trivial;
      else
        ++diverged;
    }
  }
  return {converged == 0, "20 attempts: " + std::to_string(trivial) + " collapsed, " + std::to_string(diverged) +
                              " diverged, " + std::to_string(converged) + " converged"};
}

Outcome refinement() {
  const auto ex = NonlinearitySpec::exponential();
  const WaveProfile w = solve13();
  if (!w.converged) return {false, "base solve failed"};
  const double a = amplitude(w);
  const Grid& g = w.profile.grid;
  const WaveProfile fine = newton_solve(ex, w.c, resample(w.profile, Grid(g.half_length(), 2 * g.size())));
  const WaveProfile wide = newton_solve(ex, w.c, resample(w.profile, Grid(1.5 * g.half_length(), g.size())));
  if (!fine.converged || !wide.converged) return {false, "re-solve failed"};
  const double dn = rel(amplitude(fine), a), dT = rel(amplitude(wide), a);
  return {dn <= 1e-8 && dT <= 1e-8, "n x 2: " + fmt("%.2e", dn) + ", T x 1.5: " + fmt("%.2e", dT)};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "hombridge_acceptance";
  std::filesystem::create_directories(dir);
  auto run = [&](const std::string& name) {
    CtlOptions o;
    o.f = "exp(u)-1";
    o.c_start = 1.35;
    o.c_end = 0.8;
    o.step = 0.025;
    o.csv = (dir / (name + ".csv")).string();
    std::ostringstream out, err;
    const int code = run_sweep(o, out, err);
    std::ifstream f(o.csv, std::ios::binary);
    std::ostringstream text;
    text << f.rdbuf();
    return std::make_pair(code, text.str());
  };
  const auto a = run("first"), b = run("second");
  const bool ok = a.first == 0 && b.first == 0 && !a.second.empty() && a.second == b.second;
  return {ok, "exit codes " + std::to_string(a.first) + "/" + std::to_string(b.first) + ", " +
                  std::to_string(a.second.size()) + " bytes, identical: " + (a.second == b.second ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::pair<double, std::function<Outcome()>> criteria[] = {
      {1, piecewise_bound}, {1, exponential_bound}, {1, multiplier},       {1, analytic_sine},
      {30, end_to_end},     {600, blow_up},         {0, tail_diagnostics}, {60, linear_collapse},
      {0, refinement},      {0, determinism},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [limit, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit == 0 || seconds < limit;
    if (!in_time) o.detail += ", over the " + fmt("%g s", limit) + " budget";
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %d %s (%.3f s) %s\n", index++, pass ? "PASS" : "FAIL", seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
