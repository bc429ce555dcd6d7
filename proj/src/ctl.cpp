#include "hombridge/ctl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hombridge/bound.hpp"
#include "hombridge/error.hpp"

namespace hombridge {

using nlohmann::json;

namespace {

constexpr double kLoadResidualTolerance = 1e-9;

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string g17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt("%.17g", v);
}

std::string g10(double v) { return fmt("%.10g", v); }

std::string real_to_string(real v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}

real real_from_string(const std::string& s) {
  char* end = nullptr;
  const real v = std::strtold(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw IoError("malformed value '" + s + "' in solution file");
  return v;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json report_to_json(const DiagnosticsReport& r) {
  return json{
      {"c", r.c},
      {"amplitude", r.amplitude},
      {"lower_bound", optional_number(r.lower_bound)},
      {"bound_ok", r.bound_ok},
      {"bound_margin", r.bound_margin},
      {"energy_identity_residual", r.energy_identity_residual},
      {"energy_identity_limit", r.energy_identity_limit},
      {"energy_inequality_slack", r.energy_inequality_slack},
      {"energy_inequality_limit", r.energy_inequality_limit},
      {"energy_ok", r.energy_ok},
      {"identity6_max_residual", r.identity6_max_residual},
      {"identity6_limit", r.identity6_limit},
      {"identity6_pairs", r.identity6_pairs},
      {"identity6_ok", r.identity6_ok},
      {"sign_changes_left", r.sign_changes_left},
      {"sign_changes_right", r.sign_changes_right},
      {"sign_changes_ok", r.sign_changes_ok},
      {"decay",
       {{"boundary_max", r.decay.boundary_max},
        {"boundary_limit", r.decay.boundary_limit},
        {"boundary_ok", r.decay.boundary_ok},
        {"fitted_rate", optional_number(r.decay.fitted_rate)},
        {"expected_rate", r.decay.expected_rate},
        {"peaks_used", r.decay.peaks_used},
        {"rate_ok", r.decay.rate_ok},
        {"passed", r.decay.passed}}},
      {"hamiltonian_boundary", r.hamiltonian_boundary},
      {"overall_pass", r.overall_pass},
  };
}

DiagnosticsReport report_from_json(const json& j) {
  DiagnosticsReport r;
  r.c = j.at("c").get<double>();
  r.amplitude = j.at("amplitude").get<double>();
  r.lower_bound = read_optional(j.at("lower_bound"));
  r.bound_ok = j.at("bound_ok").get<bool>();
  r.bound_margin = j.at("bound_margin").get<double>();
  r.energy_identity_residual = j.at("energy_identity_residual").get<double>();
  r.energy_identity_limit = j.at("energy_identity_limit").get<double>();
  r.energy_inequality_slack = j.at("energy_inequality_slack").get<double>();
  r.energy_inequality_limit = j.at("energy_inequality_limit").get<double>();
  r.energy_ok = j.at("energy_ok").get<bool>();
  r.identity6_max_residual = j.at("identity6_max_residual").get<double>();
  r.identity6_limit = j.at("identity6_limit").get<double>();
  r.identity6_pairs = j.at("identity6_pairs").get<std::size_t>();
  r.identity6_ok = j.at("identity6_ok").get<bool>();
  r.sign_changes_left = j.at("sign_changes_left").get<std::size_t>();
  r.sign_changes_right = j.at("sign_changes_right").get<std::size_t>();
  r.sign_changes_ok = j.at("sign_changes_ok").get<bool>();
  const json& d = j.at("decay");
  r.decay.boundary_max = d.at("boundary_max").get<std::array<double, 4>>();
  r.decay.boundary_limit = d.at("boundary_limit").get<double>();
  r.decay.boundary_ok = d.at("boundary_ok").get<bool>();
  r.decay.fitted_rate = read_optional(d.at("fitted_rate"));
  r.decay.expected_rate = d.at("expected_rate").get<double>();
  r.decay.peaks_used = d.at("peaks_used").get<std::size_t>();
  r.decay.rate_ok = d.at("rate_ok").get<bool>();
  r.decay.passed = d.at("passed").get<bool>();
  r.hamiltonian_boundary = j.at("hamiltonian_boundary").get<double>();
  r.overall_pass = j.at("overall_pass").get<bool>();
  return r;
}

NonlinearitySpec spec_from(const CtlOptions& o) {
  if (o.f.empty() == o.builtin.empty()) throw InvalidArgument("give exactly one of --f and --builtin");
  NonlinearitySpec s = o.f.empty() ? NonlinearitySpec::builtin(o.builtin) : NonlinearitySpec::parse(o.f);
  return o.max_smoothing > 0 ? s.with_max_smoothing(o.max_smoothing) : s;
}

double require_c(const std::optional<double>& c, const char* flag) {
  if (!c) throw InvalidArgument(std::string("missing ") + flag);
  return *c;
}

std::string bound_text(const std::optional<double>& L) { return L ? g10(*L) : "inf"; }

std::string inadmissible_text(const NonlinearitySpec& spec, double c) {
  return "c = " + g10(c) + " is inadmissible: need 0 < c^4 < 4 f'(0), got c^4 = " +
         g10(std::pow(c, 4)) + " and 4 f'(0) = " + g10(4 * spec.fprime_at_zero());
}

// Runs `body`, mapping library errors to exit codes.
template <class Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const InadmissibleSpeed& e) {
    err << "error: " << e.what() << '\n';
    return kExitInadmissible;
  } catch (const SolverFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// Applies fn(i) for i in [0, count) on up to `workers` threads.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("error writing '" + path + "'");
}

}  // namespace

SweepRecord make_record(const WaveProfile& w, const DiagnosticsReport& r) {
  SweepRecord s;
  s.c = w.c;
  s.amplitude = r.amplitude;
  s.lower_bound = r.lower_bound.value_or(std::numeric_limits<double>::infinity());
  s.residual_norm = w.residual_norm;
  s.sign_changes_left = r.sign_changes_left;
  s.sign_changes_right = r.sign_changes_right;
  s.bound_ok = r.bound_ok;
  s.overall_pass = r.overall_pass;
  return s;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << g17(r.c) << ',' << g17(r.amplitude) << ',' << g17(r.lower_bound) << ','
       << g17(r.residual_norm) << ',' << r.sign_changes_left << ',' << r.sign_changes_right << ','
       << (r.bound_ok ? "true" : "false") << ',' << (r.overall_pass ? "true" : "false") << '\n';
  }
}

void write_sweep_svg(std::ostream& os, const std::vector<SweepRecord>& records) {
  constexpr double W = 720, H = 480, left = 80, right = 160, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double cmin = INFINITY, cmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& r : records) {
    cmin = std::min(cmin, r.c);
    cmax = std::max(cmax, r.c);
    for (double v : {r.amplitude, r.lower_bound}) {
      if (!(v > 0) || !std::isfinite(v)) continue;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!std::isfinite(cmin)) cmin = 0, cmax = 1;
  if (cmax == cmin) cmin -= 0.5, cmax += 0.5;
  if (!std::isfinite(ymin)) ymin = 1, ymax = 10;
  const double lo = std::floor(std::log10(ymin)), hi = std::max(lo + 1, std::ceil(std::log10(ymax)));

  auto X = [&](double c) { return left + (c - cmin) / (cmax - cmin) * pw; };
  auto Y = [&](double v) { return top + (hi - std::log10(v)) / (hi - lo) * ph; };
  auto num = [](double v) { return fmt("%.2f", v); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 5; ++k) {
    const double c = cmin + (cmax - cmin) * k / 5;
    const double x = X(c);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << top + ph << "\" x2=\"" << num(x) << "\" y2=\""
       << top + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\">"
       << fmt("%.3g", c) << "</text>\n";
  }
  for (double e = lo; e <= hi; e += 1) {
    const double y = Y(std::pow(10.0, e));
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << left + pw << "\" y2=\""
       << num(y) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e"
       << static_cast<int>(e) << "</text>\n";
  }
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">c</text>\n";
  os << "<text x=\"20\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << num(top + ph / 2) << ")\">||u||, L(f,c)</text>\n";

  auto polyline = [&](auto value, const char* colour, const char* dash) {
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\"" << dash << " points=\"";
    bool first = true;
    for (const auto& r : records) {
      const double v = value(r);
      if (!(v > 0) || !std::isfinite(v)) continue;
      os << (first ? "" : " ") << num(X(r.c)) << ',' << num(Y(v));
      first = false;
    }
    os << "\"/>\n";
  };
  polyline([](const SweepRecord& r) { return r.amplitude; }, "#1f77b4", "");
  polyline([](const SweepRecord& r) { return r.lower_bound; }, "#d62728", " stroke-dasharray=\"6 4\"");

  const double lx = left + pw + 15;
  os << "<line x1=\"" << lx << "\" y1=\"" << top + 10 << "\" x2=\"" << lx + 25 << "\" y2=\"" << top + 10
     << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << lx + 30 << "\" y=\"" << top + 14 << "\">amplitude</text>\n";
  os << "<line x1=\"" << lx << "\" y1=\"" << top + 30 << "\" x2=\"" << lx + 25 << "\" y2=\"" << top + 30
     << "\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
  os << "<text x=\"" << lx + 30 << "\" y=\"" << top + 34 << "\">L(f,c)</text>\n";
  os << "</svg>\n";
}

Profile SolutionFile::profile() const { return Profile(Grid(T, n), values); }

NonlinearitySpec SolutionFile::spec() const {
  NonlinearitySpec s = NonlinearitySpec::parse(nonlinearity_source);
  return max_smoothing > 0 ? s.with_max_smoothing(max_smoothing) : s;
}

SolutionFile make_solution_file(const WaveProfile& w, const NonlinearitySpec& spec,
                                const DiagnosticsReport& report) {
  SolutionFile f;
  f.nonlinearity_source = spec.source();
  f.max_smoothing = spec.max_smoothing();
  f.c = w.c;
  f.T = w.profile.grid.half_length();
  f.n = w.profile.size();
  f.values = w.profile.values;
  f.residual_norm = w.residual_norm;
  f.amplitude = report.amplitude;
  f.diagnostics = report;
  return f;
}

void save_solution(const std::string& path, const SolutionFile& file) {
  json values = json::array();
  for (real v : file.values) values.push_back(real_to_string(v));
  const json j{
      {"format_version", file.format_version},
      {"nonlinearity_source", file.nonlinearity_source},
      {"max_smoothing", file.max_smoothing},
      {"c", file.c},
      {"T", file.T},
      {"n", file.n},
      {"residual_norm", file.residual_norm},
      {"amplitude", file.amplitude},
      {"diagnostics", report_to_json(file.diagnostics)},
      {"values", std::move(values)},
  };
  write_file(path, j.dump(1) + "\n");
}

SolutionFile load_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("solution file not found: '" + path + "'");
  SolutionFile f;
  try {
    const json j = json::parse(in);
    f.format_version = j.at("format_version").get<int>();
    if (f.format_version != kSolutionFormatVersion)
      throw IoError("unsupported solution format_version " + std::to_string(f.format_version) +
                    " (expected " + std::to_string(kSolutionFormatVersion) + ")");
    f.nonlinearity_source = j.at("nonlinearity_source").get<std::string>();
    f.max_smoothing = j.value("max_smoothing", 0.0);
    f.c = j.at("c").get<double>();
    f.T = j.at("T").get<double>();
    f.n = j.at("n").get<std::size_t>();
    f.residual_norm = j.at("residual_norm").get<double>();
    f.amplitude = j.at("amplitude").get<double>();
    f.diagnostics = report_from_json(j.at("diagnostics"));
    for (const auto& v : j.at("values")) f.values.push_back(real_from_string(v.get<std::string>()));
  } catch (const json::exception& e) {
    throw IoError("malformed solution file '" + path + "': " + e.what());
  }
  if (f.values.size() != f.n)
    throw IoError("solution file has " + std::to_string(f.values.size()) + " values but n = " +
                  std::to_string(f.n));

  const double recomputed = static_cast<double>(residual(f.spec(), f.c, f.profile()).sup_norm());
  if (!(std::abs(recomputed - f.residual_norm) <= kLoadResidualTolerance))
    throw IoError("residual mismatch in '" + path + "': stored " + g10(f.residual_norm) +
                  ", recomputed " + g10(recomputed));
  return f;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("HOMBRIDGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run_bound(const CtlOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto spec = spec_from(o);
    const double c = require_c(o.c, "--c");
    out << "f = " << spec.source() << '\n';
    out << "c = " << g10(c) << '\n';
    out << "threshold c^4/4 = " << g10(std::pow(c, 4) / 4) << '\n';
    if (!admissible(spec, c)) {
      out << "admissible = false\n";
      err << "error: " << inadmissible_text(spec, c) << '\n';
      return int{kExitInadmissible};
    }
    out << "admissible = true\n";
    const auto b = lower_bound_L(spec, c, o.search_max);
    if (b.value)
      out << "L = " << g10(*b.value) << '\n';
    else
      out << "L = unbounded (Corollary regime: no nonzero homoclinic solutions expected)\n";
    const auto tp = tail_parameters(spec, c);
    out << "tail rho = " << g10(tp.rho) << " omega = " << g10(tp.omega) << '\n';
    return int{kExitOk};
  });
}

int run_solve(const CtlOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto spec = spec_from(o);
    const double c = require_c(o.c, "--c");
    if (!admissible(spec, c)) {
      err << "error: " << inadmissible_text(spec, c) << '\n';
      return int{kExitInadmissible};
    }
    SolverConfig cfg;
    cfg.newton_tol = o.tol;
    const Grid grid(o.T, o.n);
    const WaveProfile w = solve_wave(spec, c, grid, cfg, o.seed_amplitude);
    const auto L = lower_bound_L(spec, c, o.search_max);
    if (!w.converged) {
      if (w.status == SolveStatus::Trivial && !L.value)
        out << "collapsed to zero; consistent with Corollary (" << w.message << ")\n";
      else if (w.status == SolveStatus::Trivial)
        out << "collapsed to zero: " << w.message << '\n';
      else
        out << "no convergence (" << to_string(w.status) << "): " << w.message << '\n';
      return int{kExitSolver};
    }
    const auto report = diagnose(w, spec);
    if (!o.out.empty()) save_solution(o.out, make_solution_file(w, spec, report));
    out << "c=" << g10(c) << " amplitude=" << g10(report.amplitude) << " L=" << bound_text(L.value)
        << " bound_ok=" << (report.bound_ok ? "true" : "false")
        << " pass=" << (report.overall_pass ? "true" : "false") << '\n';
    return int{report.overall_pass ? kExitOk : kExitDiagnostics};
  });
}

int run_sweep(const CtlOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto spec = spec_from(o);
    const double c_start =
        o.c_start.value_or(std::round(0.95 * std::pow(4 * spec.fprime_at_zero(), 0.25) * 10) / 10);
    const double c_end = require_c(o.c_end, "--c-end");
    if (!(c_end < c_start)) {
      err << "error: sweep needs --c-end < --c-start (got " << g10(c_end) << " >= " << g10(c_start) << ")\n";
      return int{kExitUsage};
    }
    if (!admissible(spec, c_start)) {
      err << "error: " << inadmissible_text(spec, c_start) << '\n';
      return int{kExitInadmissible};
    }
    SolverConfig cfg;
    cfg.newton_tol = o.tol;
    cfg.continuation_step = o.step;
    cfg.min_continuation_step = o.min_step;
    const auto result = continue_in_c(spec, c_start, c_end, cfg, Grid(o.T, o.n), o.seed_amplitude);

    std::vector<SweepRecord> records(result.waves.size());
    parallel_for(records.size(), o.threads ? o.threads : worker_count(), [&](std::size_t i) {
      records[i] = make_record(result.waves[i], diagnose(result.waves[i], spec));
    });

    std::ostringstream csv;
    write_sweep_csv(csv, records);
    if (o.csv.empty())
      out << csv.str();
    else
      write_file(o.csv, csv.str());
    if (!o.svg.empty()) {
      std::ostringstream svg;
      write_sweep_svg(svg, records);
      write_file(o.svg, svg.str());
    }

    const bool all_pass = std::all_of(records.begin(), records.end(),
                                      [](const SweepRecord& r) { return r.overall_pass; });
    const auto failing = std::count_if(records.begin(), records.end(),
                                       [](const SweepRecord& r) { return !r.overall_pass; });
    err << "sweep: " << records.size() << " waves from c=" << g10(c_start) << " to c=" << g10(result.last_good_c)
        << ", " << failing << " failing diagnostics\n";
    if (result.aborted) {
      err << "sweep stopped early: " << result.message << '\n';
      return int{kExitPartialSweep};
    }
    return int{all_pass ? kExitOk : kExitDiagnostics};
  });
}

int run_check(const CtlOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto spec = spec_from(o);
    double u_max = 100;
    if (o.u_max) {
      u_max = *o.u_max;
    } else if (o.c && admissible(spec, *o.c)) {
      if (const auto L = lower_bound_L(spec, *o.c, o.search_max); L.value) u_max = 10 * *L.value;
    }
    if (!(u_max > 0)) throw InvalidArgument("--u-max must be positive");
    if (o.samples < 16) throw InvalidArgument("--samples must be at least 16");
    const auto r = check_assumptions(spec, u_max, o.samples);
    out << "f = " << spec.source() << '\n';
    out << "sampled " << r.samples << " points per sign on [1e-8, " << g10(r.u_max)
        << "] (heuristic: sampling, not proof)\n";
    out << "A1 u f(u) > 0: " << (r.a1_pass ? "pass" : "fail");
    if (r.first_violation) out << " (first violation at u = " << g10(*r.first_violation) << ")";
    out << '\n';
    out << "A2 f'(0) > 0: " << (r.a2_pass ? "pass" : "fail") << " (f'(0) = " << g10(r.fprime_at_zero) << ")\n";
    return int{r.a1_pass && r.a2_pass ? kExitOk : kExitDiagnostics};
  });
}

}  // namespace hombridge
