#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsflow/config.hpp"
#include "rsflow/io.hpp"
#include "rsflow/monitors.hpp"
#include "rsflow/validator.hpp"

namespace rsflow {

enum ExitCode : int {
  kExitPass = 0,
  kExitMonitorFail = 1,
  kExitAbort = 2,
  kExitConfig = 3,
  kExitIo = 4,
};

// Integration result independent of the formulation.
struct RunTrace {
  std::vector<SolverState> snapshots;
  std::vector<TimeSeriesRecord> records;
  StepStatistics stats;
  bool aborted = false;
  std::string abort_reason;
};

SolverState initial_solver_state(const RunConfig& config);
RunTrace integrate_from(const SolverState& start, const RunConfig& config);
MonitorFrame make_frame(const SolverState& state, const RunConfig& config);

// Largest relative deviation of (a, b) from the background over the
// snapshots (b off the pole). Meaningful for rho = 0 only.
double background_deviation(const std::vector<SolverState>& snapshots, const BackgroundModel& model);

struct RunSummary {
  std::string config_hash;
  Formulation formulation = Formulation::Arclength;
  double t_start = 0.0;
  double t_final = 0.0;
  double final_volume = 0.0;
  double final_sup_f1_compact = 0.0;
  StepStatistics stats;
  bool aborted = false;
  std::string abort_reason;
  Verdict verdict = Verdict::Pass;
  std::string rho_gate = "pass";  // pass, skipped (rho = 0) or overridden
  std::optional<double> background_deviation;
  bool resumed = false;
  bool scheme_changed = false;
  int exit_code = kExitPass;

  std::string to_text() const;
};

struct RunResult {
  RunSummary summary;
  MonitorReport report;
  RunTrace trace;
  std::filesystem::path dir;
};

struct RunOptions {
  bool override_rho_gate = false;
};

// Checks the rho gate, integrates, monitors and writes the configured outputs
// into dir. Errors propagate as Error; cmd_* below map them to exit codes.
RunResult execute(const RunConfig& config, const std::filesystem::path& dir, const RunOptions& options,
                  std::ostream& log);
RunResult execute_from(const SolverState& start, const RunConfig& config, const std::filesystem::path& dir,
                       const RunOptions& options, std::ostream& log, bool scheme_changed = false);

// One refinement level of the oracle ladder.
struct OracleLevel {
  std::size_t cells = 0;
  double spacing = 0.0;
  double max_rel_a = 0.0;
  double max_rel_b = 0.0;
  double cross_check = -1.0;  // n = 2 only: radial vs conformal discrepancy
  double seconds = 0.0;

  double error() const { return max_rel_a > max_rel_b ? max_rel_a : max_rel_b; }
};

struct OracleReport {
  Formulation formulation = Formulation::Radial;
  double expected_order = 2.0;
  std::vector<OracleLevel> levels;
  std::vector<double> spatial_orders;  // per consecutive pair
  std::vector<double> cross_orders;    // n = 2 only
  std::optional<double> temporal_order;
  bool stationary = false;             // m = 1: the background does not move
  bool exact = false;                  // finest error below round-off
  bool passed = false;
  std::vector<std::string> failures;

  std::string to_text() const;
};

// Runs the config with rho forced to zero on levels cells/2^k, k = levels-1..0.
// Gates: finest error <= 1e-4, or drift <= 1e-8 when m = 1; finest-pair order
// within 10% of 2 (>= 1.8 for the fourth-order arclength formulation), skipped
// when the finest error is at round-off; for n = 2 the finest cross-check
// discrepancy <= 1e-4.
OracleReport run_oracle(const RunConfig& config, int levels, bool with_temporal = true);

// n = 2: discrepancy between the radial and conformal runs of config on
// levels cells/2^k (rho as configured).
struct CrossCheckLadder {
  std::vector<std::size_t> cells;
  std::vector<double> discrepancy;
  std::vector<double> orders;
};

CrossCheckLadder cross_check_ladder(const RunConfig& config, int levels);

int cmd_run(const std::filesystem::path& config_path, const RunOptions& options,
            const std::optional<std::filesystem::path>& out, std::ostream& out_stream, std::ostream& err);
int cmd_validate_rho(const std::filesystem::path& config_path, std::ostream& out_stream, std::ostream& err);
int cmd_oracle(const std::filesystem::path& config_path, int levels, std::ostream& out_stream,
               std::ostream& err);
int cmd_resume(const std::filesystem::path& snapshot_path, const std::filesystem::path& config_path,
               const RunOptions& options, const std::optional<std::filesystem::path>& out,
               std::ostream& out_stream, std::ostream& err);
// Every entry writes into out/<config hash>; entries run on up to jobs threads.
int cmd_sweep(const std::filesystem::path& sweep_path, const RunOptions& options,
              const std::optional<std::filesystem::path>& out, unsigned jobs, std::ostream& out_stream,
              std::ostream& err);

}  // namespace rsflow
