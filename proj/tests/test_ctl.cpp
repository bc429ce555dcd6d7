#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hombridge/ctl.hpp"
#include "oracles.hpp"

using namespace hombridge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hombridge_test_ctl";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

struct Run {
  int code;
  std::string out, err;
};

template <class F>
Run run(F f, const CtlOptions& o) {
  std::ostringstream out, err;
  const int code = f(o, out, err);
  return {code, out.str(), err.str()};
}

CtlOptions with_f(const std::string& f) {
  CtlOptions o;
  o.f = f;
  return o;
}

const WaveProfile& wave13() {
  static const WaveProfile w = solve_wave(NonlinearitySpec::exponential(), 1.3, Grid(100.0, 4096));
  return w;
}

}  // namespace

TEST_CASE("CSV layout") {
  std::vector<SweepRecord> rows(2);
  rows[0] = {1.3, 3.35, 0.716, 2.5e-13, 15, 15, true, true};
  rows[1] = {0.1, 0.5, INFINITY, 1e-11, 3, 4, false, false};
  std::ostringstream os;
  write_sweep_csv(os, rows);
  const auto l = lines(os.str());
  REQUIRE(l.size() == 3);
  CHECK(l[0] == "c,amplitude,lower_bound,residual_norm,sign_changes_left,sign_changes_right,bound_ok,overall_pass");
  CHECK(l[1] == "1.3,3.3500000000000001,0.71599999999999997,2.4999999999999999e-13,15,15,true,true");
  CHECK(l[2] == "0.10000000000000001,0.5,inf,9.9999999999999994e-12,3,4,false,false");
  CHECK(std::stod(split(l[1])[1]) == 3.35);

  std::ostringstream empty;
  write_sweep_csv(empty, {});
  CHECK(empty.str() == std::string(kCsvHeader) + "\n");
}

TEST_CASE("SVG plot is deterministic and has two polylines") {
  std::vector<SweepRecord> rows;
  for (int k = 0; k < 5; ++k) {
    const double c = 1.3 - 0.1 * k;
    rows.push_back({c, 3.0 + 10 * k, oracle::exponential_bound(c), 1e-12, 10, 10, true, true});
  }
  std::ostringstream a, b;
  write_sweep_svg(a, rows);
  write_sweep_svg(b, rows);
  CHECK(a.str() == b.str());
  const std::string svg = a.str();
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t polylines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  CHECK(polylines == 2);
  CHECK(svg.find("1e0") != std::string::npos);
  CHECK(svg.find("1e2") != std::string::npos);
  std::ostringstream none;
  CHECK_NOTHROW(write_sweep_svg(none, {}));
}

TEST_CASE("solution file round trip") {
  const WaveProfile& w = wave13();
  REQUIRE(w.converged);
  const auto spec = NonlinearitySpec::exponential();
  const auto report = diagnose(w, spec);
  const auto path = scratch("w13.json").string();
  save_solution(path, make_solution_file(w, spec, report));

  const SolutionFile f = load_solution(path);
  CHECK(f.format_version == 1);
  CHECK(f.n == 4096);
  CHECK(f.T == 100.0);
  CHECK(f.c == 1.3);
  REQUIRE(f.values.size() == w.profile.values.size());
  bool identical = true;
  for (std::size_t j = 0; j < f.values.size(); ++j) identical &= f.values[j] == w.profile.values[j];
  CHECK(identical);
  CHECK(f.residual_norm == w.residual_norm);
  CHECK(f.amplitude == report.amplitude);
  CHECK(f.diagnostics.overall_pass == report.overall_pass);
  CHECK(f.diagnostics.identity6_max_residual == report.identity6_max_residual);
  CHECK(f.diagnostics.lower_bound == report.lower_bound);
  CHECK(f.diagnostics.decay.fitted_rate == report.decay.fitted_rate);
}

TEST_CASE("solution file rejects tampering, bad versions and missing files") {
  const WaveProfile& w = wave13();
  REQUIRE(w.converged);
  const auto spec = NonlinearitySpec::exponential();
  const auto path = scratch("tamper.json").string();
  save_solution(path, make_solution_file(w, spec, diagnose(w, spec)));

  auto j = nlohmann::json::parse(slurp(path));
  j["values"][2048] = "-3.3";
  std::ofstream(path) << j.dump();
  CHECK_THROWS_WITH_AS(load_solution(path), doctest::Contains("residual mismatch"), IoError);

  j = nlohmann::json::parse(slurp(path));
  j["values"][2048] = j["values"][2047];
  j["format_version"] = 2;
  std::ofstream(path) << j.dump();
  CHECK_THROWS_WITH_AS(load_solution(path), doctest::Contains("format_version"), IoError);

  j["format_version"] = 1;
  j["n"] = 2048;
  std::ofstream(path) << j.dump();
  CHECK_THROWS_AS(load_solution(path), IoError);

  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_solution(path), IoError);

  CHECK_THROWS_WITH_AS(load_solution(scratch("missing.json").string()), doctest::Contains("not found"), IoError);
}

TEST_CASE("bound subcommand") {
  CtlOptions o = with_f("max(u,-1)");
  o.c = 1.0;
  auto r = run(run_bound, o);
  CHECK(r.code == 0);
  CHECK(r.out.find("L = 4\n") != std::string::npos);

  o = with_f("exp(u)-1");
  o.c = 1.0;
  r = run(run_bound, o);
  CHECK(r.code == 0);
  const auto at = r.out.find("L = ");
  REQUIRE(at != std::string::npos);
  const double L = std::stod(r.out.substr(at + 4));
  CHECK(L == doctest::Approx(3.9207).epsilon(1e-4));
  CHECK(L == doctest::Approx(oracle::exponential_bound(1.0)).epsilon(1e-9));

  o = with_f("u");
  o.c = 1.0;
  r = run(run_bound, o);
  CHECK(r.code == 0);
  CHECK(r.out.find("unbounded (Corollary regime: no nonzero homoclinic solutions expected)") != std::string::npos);

  o.c = 1.5;
  CHECK(run(run_bound, o).code == kExitInadmissible);

  o = with_f("u +");
  o.c = 1.0;
  r = run(run_bound, o);
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("position 3") != std::string::npos);

  o = CtlOptions{};
  o.builtin = "piecewise";
  o.f = "u";
  o.c = 1.0;
  CHECK(run(run_bound, o).code == kExitUsage);
}

TEST_CASE("solve subcommand") {
  CtlOptions o = with_f("exp(u)-1");
  o.c = 1.3;
  o.out = scratch("solve13.json").string();
  auto r = run(run_solve, o);
  CHECK(r.code == 0);
  CHECK(r.out.rfind("c=1.3 amplitude=3.35", 0) == 0);
  CHECK(r.out.find("bound_ok=true pass=true") != std::string::npos);
  const SolutionFile f = load_solution(o.out);
  CHECK(f.diagnostics.bound_ok);

  o = with_f("u");
  o.c = 1.0;
  r = run(run_solve, o);
  CHECK(r.code == kExitSolver);
  CHECK(r.out.find("collapsed to zero; consistent with Corollary") != std::string::npos);

  o = with_f("exp(u)-1");
  o.c = 1.5;
  CHECK(run(run_solve, o).code == kExitInadmissible);

  o.c = 1.3;
  o.n = 1000;
  CHECK(run(run_solve, o).code == kExitUsage);
}

TEST_CASE("sweep subcommand: piecewise stays above 4/c^4") {
  CtlOptions o;
  o.builtin = "piecewise";
  o.c_start = 1.3;
  o.c_end = 0.9;
  o.csv = scratch("pw.csv").string();
  const auto r = run(run_sweep, o);
  CHECK(r.code == 0);
  const auto l = lines(slurp(o.csv));
  REQUIRE(l.size() >= 2);
  CHECK(l[0] == kCsvHeader);
  for (std::size_t k = 1; k < l.size(); ++k) {
    const auto cells = split(l[k]);
    REQUIRE(cells.size() == 8);
    const double c = std::stod(cells[0]), amp = std::stod(cells[1]), L = std::stod(cells[2]);
    CHECK(amp >= 4 / std::pow(c, 4));
    CHECK(L == doctest::Approx(4 / std::pow(c, 4)).epsilon(1e-9));
    CHECK(cells[6] == "true");
  }
  CHECK(std::stod(split(l.back())[0]) == 0.9);
}

TEST_CASE("sweep subcommand: determinism and thread independence") {
  CtlOptions o;
  o.builtin = "exponential";
  o.c_start = 1.3;
  o.c_end = 1.1;
  o.csv = scratch("a.csv").string();
  o.svg = scratch("a.svg").string();
  o.threads = 1;
  REQUIRE(run(run_sweep, o).code == 0);
  const std::string csv1 = slurp(o.csv), svg1 = slurp(o.svg);
  o.csv = scratch("b.csv").string();
  o.svg = scratch("b.svg").string();
  o.threads = 4;
  REQUIRE(run(run_sweep, o).code == 0);
  CHECK(slurp(o.csv) == csv1);
  CHECK(slurp(o.svg) == svg1);
  CHECK(lines(csv1).size() == 10);

  // Without --csv the table goes to stdout.
  o.csv.clear();
  o.svg.clear();
  CHECK(run(run_sweep, o).out == csv1);
}

TEST_CASE("sweep subcommand errors") {
  CtlOptions o;
  o.builtin = "exponential";
  o.c_start = 0.8;
  o.c_end = 1.2;
  CHECK(run(run_sweep, o).code == kExitUsage);
  o.c_start = 1.5;
  CHECK(run(run_sweep, o).code == kExitInadmissible);

  o = with_f("u");
  o.c_start = 1.0;
  o.c_end = 0.9;
  CHECK(run(run_sweep, o).code == kExitSolver);
}

TEST_CASE("sweep start defaults to 0.95 (4 f'(0))^(1/4) rounded") {
  CtlOptions o;
  o.builtin = "exponential";
  o.c_end = 1.275;
  const auto r = run(run_sweep, o);
  CHECK(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 3);
  CHECK(std::stod(split(l[1])[0]) == 1.3);
}

TEST_CASE("check subcommand") {
  CtlOptions o;
  o.builtin = "piecewise";
  auto r = run(run_check, o);
  CHECK(r.code == 0);
  CHECK(r.out.find("A1 u f(u) > 0: pass") != std::string::npos);
  CHECK(r.out.find("heuristic") != std::string::npos);
  CHECK(r.out.find(", 100]") != std::string::npos);

  o.c = 1.0;
  r = run(run_check, o);
  CHECK(r.out.find(", 40]") != std::string::npos);

  o = with_f("u - abs(u)*u");
  o.u_max = 10;
  r = run(run_check, o);
  CHECK(r.code == kExitDiagnostics);
  CHECK(r.out.find("A1 u f(u) > 0: fail") != std::string::npos);
}

TEST_CASE("worker count honours HOMBRIDGE_THREADS") {
  setenv("HOMBRIDGE_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  setenv("HOMBRIDGE_THREADS", "zero", 1);
  CHECK(worker_count() >= 1);
  unsetenv("HOMBRIDGE_THREADS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("partial sweep keeps completed rows") {
  CtlOptions o;
  o.builtin = "exponential";
  o.c_start = 1.3;
  o.c_end = 0.3;
  o.step = 0.5;
  o.min_step = 0.3;
  o.csv = scratch("partial.csv").string();
  const auto r = run(run_sweep, o);
  CHECK(r.code == kExitPartialSweep);
  CHECK(r.err.find("stopped early") != std::string::npos);
  const auto l = lines(slurp(o.csv));
  REQUIRE(l.size() == 2);
  CHECK(std::stod(split(l[1])[0]) == 1.3);
}
