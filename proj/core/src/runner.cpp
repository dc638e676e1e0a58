#include "rsflow/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "rsflow/background.hpp"
#include "rsflow/error.hpp"

namespace rsflow {

namespace {

std::string g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

template <typename Trajectory>
RunTrace to_trace(Trajectory&& tr) {
  RunTrace out;
  out.snapshots.reserve(tr.snapshots.size());
  for (auto& s : tr.snapshots) out.snapshots.emplace_back(std::move(s));
  out.records = std::move(tr.records);
  out.stats = tr.stats;
  out.aborted = tr.aborted;
  out.abort_reason = std::move(tr.abort_reason);
  return out;
}

RadialGrid grid_of(const RunConfig& c) { return RadialGrid(c.model.r0, c.n_points); }

}  // namespace

SolverState initial_solver_state(const RunConfig& c) {
  const RadialGrid grid = grid_of(c);
  switch (c.formulation) {
    case Formulation::Radial: return initial_state(grid, c.model.n, c.model.m);
    case Formulation::Arclength: return initial_arclength_state(grid, c.arclength_cells(), c.model.n, c.model.m);
    case Formulation::Conformal: return initial_conformal_state(grid, c.model);
  }
  throw Error(ErrorKind::Config, "unknown formulation");
}

RunTrace integrate_from(const SolverState& start, const RunConfig& c) {
  const IntegrationSettings settings = c.integration_settings();
  if (const auto* s = std::get_if<RadialMetricState>(&start)) {
    return to_trace(integrate(*s, c.model, c.rho, c.scheme, settings));
  }
  if (const auto* s = std::get_if<ArclengthState>(&start)) {
    return to_trace(integrate_arclength(*s, c.model, c.rho, c.scheme, settings));
  }
  return to_trace(integrate_conformal(std::get<ConformalState>(start), c.rho, c.scheme, settings));
}

MonitorFrame make_frame(const SolverState& state, const RunConfig& c) {
  if (const auto* s = std::get_if<RadialMetricState>(&state)) return make_frame(*s, c.model, c.rho, c.scheme);
  if (const auto* s = std::get_if<ArclengthState>(&state)) return make_frame(*s, c.model, c.rho, c.scheme);
  return make_frame(std::get<ConformalState>(state), c.rho, c.scheme);
}

namespace {

RadialMetricState metric_of(const SolverState& state) {
  if (const auto* s = std::get_if<RadialMetricState>(&state)) return *s;
  if (const auto* s = std::get_if<ArclengthState>(&state)) return to_metric_state(*s);
  return to_metric_state(std::get<ConformalState>(state));
}

struct Deviation {
  double a = 0.0, b = 0.0;
};

Deviation deviation(const std::vector<SolverState>& snapshots, const BackgroundModel& model) {
  Deviation d;
  for (const auto& snap : snapshots) {
    const RadialMetricState s = metric_of(snap);
    const RadialMetricState ref = background_state(s.t, model, s.grid);
    for (std::size_t i = 0; i < s.a.size(); ++i) {
      d.a = std::max(d.a, std::abs(s.a[i] - ref.a[i]) / ref.a[i]);
      if (i > 0) d.b = std::max(d.b, std::abs(s.b[i] - ref.b[i]) / ref.b[i]);
    }
  }
  return d;
}

}  // namespace

double background_deviation(const std::vector<SolverState>& snapshots, const BackgroundModel& model) {
  const Deviation d = deviation(snapshots, model);
  return std::max(d.a, d.b);
}

std::string RunSummary::to_text() const {
  std::string out = "# rsflow summary config_hash=" + config_hash + "\n";
  auto kv = [&](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  kv("formulation", std::string(to_string(formulation)));
  kv("t_start", g(t_start));
  kv("t_final", g(t_final));
  kv("final_volume", g(final_volume));
  kv("final_sup_F1_compact", g(final_sup_f1_compact));
  kv("steps_accepted", std::to_string(stats.accepted));
  kv("steps_rejected", std::to_string(stats.rejected));
  kv("dt_min", g(stats.dt_min));
  kv("dt_max", g(stats.dt_max));
  kv("aborted", aborted ? "yes" : "no");
  if (aborted) kv("abort_reason", abort_reason);
  kv("rho_gate", rho_gate);
  if (background_deviation) kv("max_background_deviation", g(*background_deviation));
  kv("resumed", resumed ? "yes" : "no");
  if (scheme_changed) kv("scheme_changed", "yes");
  kv("monitor_verdict", std::string(to_string(verdict)));
  kv("exit_code", std::to_string(exit_code));
  return out;
}

RunResult execute_from(const SolverState& start, const RunConfig& c, const std::filesystem::path& dir,
                       const RunOptions& options, std::ostream& log, bool scheme_changed) {
  c.validate();
  RunResult result;
  result.dir = dir;
  RunSummary& sum = result.summary;
  sum.config_hash = c.hash_hex();
  sum.formulation = c.formulation;
  sum.t_start = state_time(start);
  sum.resumed = sum.t_start > 0.0;
  sum.scheme_changed = scheme_changed;

  if (c.rho.family == RhoFamily::Zero) {
    sum.rho_gate = "skipped";
  } else {
    const RhoValidationReport gate = validate_rho(c.rho, c.model, c.validator);
    if (gate.overall() != Verdict::Pass) {
      if (!options.override_rho_gate) {
        log << gate.to_text();
        throw Error(ErrorKind::Config, "rho did not pass validation (use --override-rho-gate to run anyway)");
      }
      log << "warning: rho validation " << to_string(gate.overall()) << ", gate overridden\n";
      sum.rho_gate = "overridden";
    }
  }

  result.trace = integrate_from(start, c);
  const RunTrace& tr = result.trace;
  sum.stats = tr.stats;
  sum.aborted = tr.aborted;
  sum.abort_reason = tr.abort_reason;
  if (!tr.records.empty()) {
    sum.t_final = tr.records.back().t;
    sum.final_volume = tr.records.back().volume;
    sum.final_sup_f1_compact = tr.records.back().sup_f1_compact;
  }
  if (c.rho.family == RhoFamily::Zero) sum.background_deviation = background_deviation(tr.snapshots, c.model);

  std::vector<MonitorFrame> frames;
  frames.reserve(tr.snapshots.size());
  for (const auto& s : tr.snapshots) frames.push_back(make_frame(s, c));
  result.report = run_monitors(frames, tr.records, c.model, c.rho, c.monitors);
  sum.verdict = result.report.overall();
  sum.exit_code = tr.aborted ? kExitAbort : sum.verdict == Verdict::Fail ? kExitMonitorFail : kExitPass;

  const std::string hash = sum.config_hash;
  if (c.writes("series")) {
    write_text(dir / "series.csv", format_series(tr.records, hash, c.formulation == Formulation::Conformal));
  }
  if (c.writes("snapshots")) {
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%04zu.txt", k);
      write_text(dir / "snapshots" / name, format_snapshot(tr.snapshots[k], c));
    }
  }
  if (c.writes("report")) {
    write_text(dir / "monitor_report.txt", "# config_hash=" + hash + "\n" + result.report.to_text());
  }
  if (c.writes("summary")) write_text(dir / "summary.txt", sum.to_text());
  write_text(dir / "config.ini", serialize(c));
  return result;
}

RunResult execute(const RunConfig& c, const std::filesystem::path& dir, const RunOptions& options,
                  std::ostream& log) {
  c.validate();
  return execute_from(initial_solver_state(c), c, dir, options, log);
}

namespace {

double order_of(double coarse, double fine) { return std::log2(coarse / fine); }

constexpr double kRoundOff = 1e-11;

RunConfig oracle_level(const RunConfig& base, std::size_t cells) {
  RunConfig c = base;
  c.n_points = cells + 1;
  c.cells = cells;
  c.rho = RhoSpec::zero();
  return c;
}

double final_difference(const SolverState& x, const SolverState& y) {
  const RadialMetricState a = metric_of(x), b = metric_of(y);
  double d = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    d = std::max(d, std::abs(a.a[i] - b.a[i]));
    d = std::max(d, std::abs(a.b[i] - b.b[i]));
  }
  return d;
}

// Runs the partner formulation of c (radial <-> conformal) and compares.
double cross_discrepancy(const RunConfig& c, const RunTrace& tr) {
  RunConfig other = c;
  other.formulation = c.formulation == Formulation::Conformal ? Formulation::Radial : Formulation::Conformal;
  const RunTrace tp = integrate_from(initial_solver_state(other), other);
  if (tp.aborted) throw Error(ErrorKind::DtCollapse, "cross-check run aborted: " + tp.abort_reason);
  Trajectory ab;
  ConformalTrajectory conf;
  for (const RunTrace* t : {&tr, &tp}) {
    for (const auto& s : t->snapshots) {
      if (const auto* r = std::get_if<RadialMetricState>(&s)) ab.snapshots.push_back(*r);
      if (const auto* u = std::get_if<ConformalState>(&s)) conf.snapshots.push_back(*u);
    }
  }
  return cross_check(ab, conf).max();
}

}  // namespace

CrossCheckLadder cross_check_ladder(const RunConfig& config, int levels) {
  if (config.model.n != 2) throw Error(ErrorKind::Config, "the cross-check needs n = 2");
  if (config.formulation == Formulation::Arclength) {
    throw Error(ErrorKind::Config, "the cross-check pairs the radial and conformal formulations");
  }
  if (levels < 2) throw Error(ErrorKind::Config, "the ladder needs at least two levels");
  config.validate();
  const std::size_t finest = config.n_points - 1;
  const std::size_t step = std::size_t{1} << (levels - 1);
  if (finest % step != 0 || finest / step + 1 < RadialGrid::kMinPoints) {
    throw Error(ErrorKind::Config, "the finest grid must split into the requested halvings");
  }
  CrossCheckLadder out;
  for (int k = levels - 1; k >= 0; --k) {
    RunConfig c = config;
    c.n_points = (finest >> k) + 1;
    const RunTrace tr = integrate_from(initial_solver_state(c), c);
    if (tr.aborted) throw Error(ErrorKind::DtCollapse, "cross-check run aborted: " + tr.abort_reason);
    out.cells.push_back(finest >> k);
    out.discrepancy.push_back(cross_discrepancy(c, tr));
  }
  for (std::size_t k = 1; k < out.discrepancy.size(); ++k) {
    out.orders.push_back(order_of(out.discrepancy[k - 1], out.discrepancy[k]));
  }
  return out;
}

OracleReport run_oracle(const RunConfig& config, int levels, bool with_temporal) {
  if (levels < 2) throw Error(ErrorKind::Config, "the oracle ladder needs at least two levels");
  config.validate();
  OracleReport rep;
  rep.formulation = config.formulation;
  rep.expected_order = config.formulation == Formulation::Arclength ? 4.0 : 2.0;
  const std::size_t finest = config.formulation == Formulation::Arclength ? config.arclength_cells()
                                                                          : config.n_points - 1;
  const std::size_t step = std::size_t{1} << (levels - 1);
  if (finest % step != 0 || finest / step + 1 < RadialGrid::kMinPoints) {
    throw Error(ErrorKind::Config, "the finest grid must split into " + std::to_string(levels) +
                                       " halvings of at least 63 cells");
  }
  const bool two_d = config.model.n == 2;

  for (int k = levels - 1; k >= 0; --k) {
    const std::size_t cells = finest >> k;
    const RunConfig c = oracle_level(config, cells);
    const auto t0 = std::chrono::steady_clock::now();
    const RunTrace tr = integrate_from(initial_solver_state(c), c);
    if (tr.aborted) throw Error(ErrorKind::DtCollapse, "oracle run aborted: " + tr.abort_reason);
    OracleLevel lv;
    lv.cells = cells;
    lv.spacing = config.model.r0 / static_cast<double>(cells);
    const Deviation d = deviation(tr.snapshots, c.model);
    lv.max_rel_a = d.a;
    lv.max_rel_b = d.b;
    if (two_d) lv.cross_check = cross_discrepancy(c, tr);
    lv.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.levels.push_back(lv);
  }

  const OracleLevel& fine = rep.levels.back();
  rep.stationary = config.model.m == 1.0;
  rep.exact = fine.error() < kRoundOff;
  for (std::size_t k = 1; k < rep.levels.size(); ++k) {
    rep.spatial_orders.push_back(order_of(rep.levels[k - 1].error(), rep.levels[k].error()));
    if (two_d) rep.cross_orders.push_back(order_of(rep.levels[k - 1].cross_check, rep.levels[k].cross_check));
  }

  if (with_temporal) {
    // Self-convergence in dt on the coarsest grid: dt scaled by 1, 1/2, 1/4.
    const RunConfig c = oracle_level(config, finest >> (levels - 1));
    std::vector<SolverState> finals;
    for (double f : {1.0, 0.5, 0.25}) {
      RunConfig cf = c;
      cf.scheme.cfl_factor *= f;
      cf.scheme.dt_max *= f;
      finals.push_back(integrate_from(initial_solver_state(cf), cf).snapshots.back());
    }
    const double d1 = final_difference(finals[0], finals[1]);
    const double d2 = final_difference(finals[1], finals[2]);
    // Below the explicit stability bound the RK4 error is under round-off.
    if (d2 > 1e-10) rep.temporal_order = order_of(d1, d2);
  }

  if (rep.stationary) {
    if (fine.error() > 1e-8) rep.failures.push_back("drift of the stationary background above 1e-8");
  } else if (!rep.exact) {
    if (fine.error() > 1e-4) rep.failures.push_back("finest error above 1e-4");
    const double p = rep.spatial_orders.back();
    if (config.formulation == Formulation::Arclength) {
      // Higher order than required; only the second-order floor is gated.
      if (p < 1.8) rep.failures.push_back("finest-pair spatial order " + g(p) + " below 1.8");
    } else if (std::abs(p - rep.expected_order) > 0.1 * rep.expected_order) {
      rep.failures.push_back("finest-pair spatial order " + g(p) + " outside " +
                             g(0.9 * rep.expected_order) + ".." + g(1.1 * rep.expected_order));
    }
  }
  if (two_d) {
    // With rho = 0 one side may be exact, so the discrepancy is just the other
    // side's error, already gated above; its order is reported only.
    if (fine.cross_check > 1e-4) rep.failures.push_back("cross-check discrepancy above 1e-4");
  }
  rep.passed = rep.failures.empty();
  return rep;
}

std::string OracleReport::to_text() const {
  std::string out = "oracle formulation=" + std::string(to_string(formulation)) +
                    " expected_order=" + g(expected_order) + "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%8s %12s %14s %14s %14s %8s\n", "cells", "spacing", "max_rel_a",
                "max_rel_b", "cross_check", "seconds");
  out += line;
  for (const auto& lv : levels) {
    std::snprintf(line, sizeof line, "%8zu %12.6g %14.6e %14.6e %14s %8.2f\n", lv.cells, lv.spacing,
                  lv.max_rel_a, lv.max_rel_b, lv.cross_check < 0.0 ? "-" : g(lv.cross_check).c_str(),
                  lv.seconds);
    out += line;
  }
  if (stationary) {
    out += "spatial order: n/a (stationary background)\n";
  } else if (exact) {
    out += "spatial order: n/a (background reproduced to round-off)\n";
  } else {
    out += "spatial order:";
    for (double p : spatial_orders) out += " " + g(p);
    out += "\n";
  }
  if (!cross_orders.empty()) {
    out += "cross-check order:";
    for (double p : cross_orders) out += " " + g(p);
    out += "\n";
  }
  out += "temporal order: " + (temporal_order ? g(*temporal_order) : std::string("n/a (time error below round-off)")) + "\n";
  for (const auto& f : failures) out += "failure: " + f + "\n";
  out += std::string("oracle ") + (passed ? "pass" : "fail") + "\n";
  return out;
}

namespace {

// Maps library errors to the exit-code contract.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Io: return kExitIo;
      case ErrorKind::DtCollapse:
      case ErrorKind::StepRejected:
      case ErrorKind::NewtonDivergence: return kExitAbort;
      default: return kExitConfig;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

void print_outcome(const RunResult& r, std::ostream& out) {
  out << r.report.to_text() << r.summary.to_text() << "output: " << r.dir.string() << "\n";
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const RunOptions& options,
            const std::optional<std::filesystem::path>& out, std::ostream& out_stream, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load_config(config_path);
    const RunResult r = execute(c, out ? *out : std::filesystem::path(c.out_dir), options, err);
    print_outcome(r, out_stream);
    return r.summary.exit_code;
  });
}

int cmd_validate_rho(const std::filesystem::path& config_path, std::ostream& out_stream, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load_config(config_path);
    const RhoValidationReport rep = validate_rho(c.rho, c.model, c.validator);
    out_stream << rep.to_text();
    switch (rep.overall()) {
      case Verdict::Pass: return 0;
      case Verdict::Fail: return 1;
      case Verdict::Indeterminate: return 2;
    }
    return 1;
  });
}

int cmd_oracle(const std::filesystem::path& config_path, int levels, std::ostream& out_stream,
               std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load_config(config_path);
    if (c.rho.family != RhoFamily::Zero) err << "note: the oracle runs with rho = 0\n";
    const OracleReport rep = run_oracle(c, levels);
    out_stream << rep.to_text();
    return rep.passed ? kExitPass : kExitMonitorFail;
  });
}

int cmd_resume(const std::filesystem::path& snapshot_path, const std::filesystem::path& config_path,
               const RunOptions& options, const std::optional<std::filesystem::path>& out,
               std::ostream& out_stream, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load_config(config_path);
    const Snapshot snap = read_snapshot(snapshot_path);
    auto mismatch = [&](const std::string& what) {
      throw Error(ErrorKind::Config, "snapshot header does not match the config: " + what);
    };
    const auto& h = snap.header;
    if (formulation_of(snap.state) != c.formulation) mismatch("formulation");
    if (std::stoi(h.at("n")) != c.model.n) mismatch("n");
    if (std::stod(h.at("m")) != c.model.m) mismatch("m");
    if (std::stod(h.at("r0")) != c.model.r0) mismatch("r0");
    if (std::stoul(h.at("n_points")) != c.n_points) mismatch("n_points");
    if (c.formulation == Formulation::Arclength && std::stoul(h.at("cells")) != c.arclength_cells()) {
      mismatch("cells");
    }
    if (!(state_time(snap.state) < c.t_end)) mismatch("snapshot time is not before t_end");
    const bool scheme_changed = h.at("scheme") != to_string(c.scheme.kind);
    if (scheme_changed) {
      err << "warning: snapshot was written by scheme " << h.at("scheme") << ", continuing with "
          << to_string(c.scheme.kind) << "\n";
    }
    const RunResult r = execute_from(snap.state, c, out ? *out : std::filesystem::path(c.out_dir), options, err,
                                     scheme_changed);
    print_outcome(r, out_stream);
    return r.summary.exit_code;
  });
}

int cmd_sweep(const std::filesystem::path& sweep_path, const RunOptions& options,
              const std::optional<std::filesystem::path>& out, unsigned jobs, std::ostream& out_stream,
              std::ostream& err) {
  return guarded(err, [&] {
    const std::vector<RunConfig> entries = parse_sweep(read_text(sweep_path));
    const std::filesystem::path root = out ? *out : std::filesystem::path(entries.front().out_dir);
    std::vector<int> codes(entries.size(), kExitPass);
    std::vector<std::string> lines(entries.size()), logs(entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k; (k = next.fetch_add(1)) < entries.size();) {
        std::ostringstream log, sink;
        const std::string hash = entries[k].hash_hex();
        codes[k] = guarded(log, [&] {
          const RunResult r = execute(entries[k], root / hash, options, log);
          sink << "verdict=" << to_string(r.summary.verdict) << " t_final=" << g(r.summary.t_final);
          return r.summary.exit_code;
        });
        lines[k] = "entry " + std::to_string(k) + " hash=" + hash + " exit=" + std::to_string(codes[k]) + " " +
                   sink.str() + "\n";
        logs[k] = log.str();
      }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(entries.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    // Reported in entry order whatever the completion order was.
    int worst = kExitPass;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      out_stream << lines[k];
      err << logs[k];
      worst = std::max(worst, codes[k]);
    }
    return worst;
  });
}

}  // namespace rsflow
