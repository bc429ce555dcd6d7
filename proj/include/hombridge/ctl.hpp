#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hombridge/diagnostics.hpp"
#include "hombridge/nonlinearity.hpp"
#include "hombridge/solver.hpp"

namespace hombridge {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInadmissible = 2,
  kExitDiagnostics = 3,
  kExitSolver = 4,
  kExitPartialSweep = 5,
};

/// One row of a speed sweep.
struct SweepRecord {
  double c = 0.0;
  double amplitude = 0.0;
  double lower_bound = 0.0;  // +inf when L is unbounded
  double residual_norm = 0.0;
  std::size_t sign_changes_left = 0;
  std::size_t sign_changes_right = 0;
  bool bound_ok = false;
  bool overall_pass = false;
};

SweepRecord make_record(const WaveProfile& w, const DiagnosticsReport& r);

inline constexpr const char* kCsvHeader =
    "c,amplitude,lower_bound,residual_norm,sign_changes_left,sign_changes_right,bound_ok,overall_pass";

/// Header plus one line per record, reals with 17 significant digits.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);

/// Amplitude and L(f,c) against c as two polylines on a log-scaled y axis.
/// Deterministic: identical records give identical bytes.
void write_sweep_svg(std::ostream& os, const std::vector<SweepRecord>& records);

inline constexpr int kSolutionFormatVersion = 1;

struct SolutionFile {
  int format_version = kSolutionFormatVersion;
  std::string nonlinearity_source;
  double max_smoothing = 0.0;
  double c = 0.0;
  double T = 0.0;
  std::size_t n = 0;
  std::vector<real> values;
  double residual_norm = 0.0;
  double amplitude = 0.0;
  DiagnosticsReport diagnostics;

  Profile profile() const;
  NonlinearitySpec spec() const;
};

SolutionFile make_solution_file(const WaveProfile& w, const NonlinearitySpec& spec,
                                const DiagnosticsReport& report);

/// JSON text; values are written as 21-significant-digit decimal strings so
/// that long doubles survive the round trip exactly.
void save_solution(const std::string& path, const SolutionFile& file);

/// Throws IoError when the file is missing or malformed, the version is
/// unsupported, n disagrees with the values, or the recomputed residual
/// differs from the stored one by more than 1e-9.
SolutionFile load_solution(const std::string& path);

/// Flags shared by the subcommands. Exactly one of `f` / `builtin` is set.
struct CtlOptions {
  std::string f;
  std::string builtin;
  double max_smoothing = 0.0;
  std::optional<double> c;
  double T = 100.0;
  std::size_t n = 4096;
  double tol = 1e-10;
  std::string out, csv, svg;
  std::optional<double> seed_amplitude;
  std::optional<double> c_start;
  std::optional<double> c_end;
  double step = 0.025;
  double min_step = 1e-4;
  double search_max = kDefaultSearchMax;
  std::optional<double> u_max;
  std::size_t samples = 4096;
  /// Worker cap for sweep diagnostics; 0 reads HOMBRIDGE_THREADS, else
  /// hardware concurrency.
  std::size_t threads = 0;
};

/// Each subcommand prints to `out`, reports errors on `err` and returns an
/// ExitCode.
int run_bound(const CtlOptions& opts, std::ostream& out, std::ostream& err);
int run_solve(const CtlOptions& opts, std::ostream& out, std::ostream& err);
int run_sweep(const CtlOptions& opts, std::ostream& out, std::ostream& err);
int run_check(const CtlOptions& opts, std::ostream& out, std::ostream& err);

/// Number of sweep workers: HOMBRIDGE_THREADS if set and positive, else the
/// hardware concurrency (at least 1).
std::size_t worker_count();

}  // namespace hombridge
