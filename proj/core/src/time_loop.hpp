#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rsflow/error.hpp"
#include "rsflow/flow_solver.hpp"

namespace rsflow::detail {

struct LoopResult {
  StepStatistics stats;
  bool aborted = false;
  std::string abort_reason;
};

// Adaptive time loop shared by the (a,b) and conformal integrators. Steps land
// exactly on every output time; rejected steps are retried with half the step
// until dt_min. on_snapshot(state) and on_record(state, dt) receive output.
template <typename State, typename StepFn, typename DtFn, typename SnapshotFn, typename RecordFn>
LoopResult run_time_loop(State state, const IntegrationSettings& settings, double dt_min,
                         StepFn&& step, DtFn&& stable, SnapshotFn&& on_snapshot,
                         RecordFn&& on_record) {
  if (!(settings.t_end > state.t)) throw Error(ErrorKind::Config, "t_end must exceed start time");
  if (!(settings.series_interval > 0.0)) {
    throw Error(ErrorKind::Config, "series interval must be positive");
  }
  std::vector<double> outputs;
  for (double t : settings.snapshot_times) {
    if (t > state.t && t < settings.t_end) outputs.push_back(t);
  }
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  outputs.push_back(settings.t_end);

  LoopResult result;
  const double interval = settings.series_interval;
  auto next_record_index = [&](double t) { return std::floor(t / interval) + 1.0; };
  double record_index = next_record_index(state.t);
  double last_recorded_t = -1.0;
  auto record = [&](double dt) {
    on_record(state, dt);
    last_recorded_t = state.t;
  };

  if (state.t == 0.0) {
    on_snapshot(state);
    record(0.0);
  }

  for (double target : outputs) {
    while (state.t < target) {
      double dt = stable(state);
      bool lands = false;
      if (state.t + dt >= target - 1e-12 * std::max(1.0, target)) {
        dt = target - state.t;
        lands = true;
      }
      State next;
      for (;;) {
        try {
          next = step(state, dt);
          break;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::StepRejected && e.kind() != ErrorKind::NewtonDivergence) throw;
          ++result.stats.rejected;
          dt *= 0.5;
          lands = false;
          if (dt < dt_min) {
            result.aborted = true;
            result.abort_reason = std::string("dt collapse below dt_min: ") + e.what();
            on_snapshot(state);
            if (last_recorded_t != state.t) record(dt);
            return result;
          }
        }
      }
      if (lands) next.t = target;
      state = std::move(next);
      ++result.stats.accepted;
      result.stats.dt_min = result.stats.accepted == 1 ? dt : std::min(result.stats.dt_min, dt);
      result.stats.dt_max = std::max(result.stats.dt_max, dt);
      if (state.t >= record_index * interval) {
        record(dt);
        record_index = next_record_index(state.t);
      } else if (state.t == target) {
        record(dt);
      }
    }
    on_snapshot(state);
  }
  return result;
}

}  // namespace rsflow::detail
