#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rsflow/arclength.hpp"
#include "rsflow/config.hpp"
#include "rsflow/conformal.hpp"
#include "rsflow/flow_solver.hpp"
#include "rsflow/metric_state.hpp"

namespace rsflow {

inline constexpr int kSnapshotVersion = 1;

using SolverState = std::variant<RadialMetricState, ArclengthState, ConformalState>;

double state_time(const SolverState& state);
Formulation formulation_of(const SolverState& state);

// Snapshot text: a key=value header closed by "end-header", then named
// vectors ("vector NAME COUNT" followed by COUNT values, one per line).
// Values are printed with %.17g so a reload reproduces the state bit for bit.
struct Snapshot {
  std::map<std::string, std::string> header;  // version, formulation, config_hash, scheme, t, n, m, r0, n_points, cells
  SolverState state;
};

std::string format_snapshot(const SolverState& state, const RunConfig& config);
// Throws Error(Config) on a malformed header or version mismatch.
Snapshot parse_snapshot(std::string_view text);
Snapshot read_snapshot(const std::filesystem::path& path);

// Fixed column order; u_min only for two-dimensional conformal runs.
std::vector<std::string> series_columns(bool with_u_min);
std::string format_series(const std::vector<TimeSeriesRecord>& records, const std::string& config_hash,
                          bool with_u_min);
std::vector<TimeSeriesRecord> parse_series(std::string_view text);

// Writes text to path, creating parent directories. Throws Error(Io).
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rsflow
