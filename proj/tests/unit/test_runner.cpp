#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "rsflow/error.hpp"
#include "rsflow/io.hpp"
#include "rsflow/runner.hpp"

using namespace rsflow;
namespace fs = std::filesystem;

namespace {

constexpr const char* kBase = R"([geometry-core]
n_points = 65
[background-solutions]
n = 3
m = 0.5
rho_family = poly-saturating
rho_amplitude = 0.1
rho_order = 2
[flow-solver]
formulation = radial
t_end = 0.1
snapshot_interval = 0.05
series_interval = 0.01
)";

class Runner : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rsflow_runner_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path config(const std::string& name, const std::string& extra = "") {
    const fs::path p = dir_ / name;
    write_text(p, std::string(kBase) + extra);
    return p;
  }
  int run(const fs::path& cfg, const fs::path& out, bool override_gate = false) {
    RunOptions o;
    o.override_rho_gate = override_gate;
    out_.str("");
    err_.str("");
    return cmd_run(cfg, o, out, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

fs::path last_snapshot(const fs::path& run_dir) {
  fs::path last;
  for (const auto& e : fs::directory_iterator(run_dir / "snapshots")) last = std::max(last, e.path());
  return last;
}

double final_gap(const fs::path& x, const fs::path& y) {
  const auto a = std::get<RadialMetricState>(read_snapshot(x).state);
  const auto b = std::get<RadialMetricState>(read_snapshot(y).state);
  double d = std::abs(a.t - b.t);
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    d = std::max({d, std::abs(a.a[i] - b.a[i]), std::abs(a.b[i] - b.b[i])});
  }
  return d;
}

}  // namespace

TEST_F(Runner, PassingRunWritesEveryArtifact) {
  EXPECT_EQ(run(config("ok.ini"), dir_ / "out"), kExitPass) << err_.str();
  for (const char* f : {"series.csv", "monitor_report.txt", "summary.txt", "config.ini",
                        "snapshots/snapshot_0000.txt", "snapshots/snapshot_0002.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  const std::string summary = read_text(dir_ / "out" / "summary.txt");
  EXPECT_NE(summary.find("exit_code = 0"), std::string::npos);
  EXPECT_NE(summary.find("rho_gate = pass"), std::string::npos);
}

TEST_F(Runner, OracleConfigReportsBackgroundDeviation) {
  const fs::path p = dir_ / "oracle.ini";
  write_text(p, "[geometry-core]\nn_points = 101\n[background-solutions]\nn = 3\nm = 2\nrho_family = zero\n"
                "[flow-solver]\nformulation = radial\nt_end = 0.2\nsnapshot_interval = 0.1\n");
  EXPECT_EQ(run(p, dir_ / "out"), kExitPass) << err_.str();
  const std::string summary = read_text(dir_ / "out" / "summary.txt");
  const auto at = summary.find("max_background_deviation = ");
  ASSERT_NE(at, std::string::npos);
  EXPECT_LE(std::stod(summary.substr(at + 27)), 1e-4);
  EXPECT_NE(summary.find("rho_gate = skipped"), std::string::npos);
}

TEST_F(Runner, InadmissibleRhoIsRejected) {
  const std::string table =
      "rho_family = custom-table\nrho_table_t = 0, 1, 2, 3\nrho_table_value = 0, 0.1, 0.05, 0.2\nrho_t_ramp = 0.5\n";
  std::string text = kBase;
  text.replace(text.find("rho_family = poly-saturating\n"), 29, table);
  const fs::path p = dir_ / "bad.ini";
  write_text(p, text);
  EXPECT_EQ(run(p, dir_ / "out"), kExitConfig);
  EXPECT_NE(err_.str().find("monotone"), std::string::npos) << err_.str();
  EXPECT_FALSE(fs::exists(dir_ / "out" / "summary.txt"));
  EXPECT_NE(run(p, dir_ / "out2", true), kExitConfig);
  EXPECT_NE(read_text(dir_ / "out2" / "summary.txt").find("rho_gate = overridden"), std::string::npos);
}

TEST_F(Runner, ZeroToleranceMonitorFails) {
  const auto p = config("strict.ini", "[invariant-monitors]\nenabled = radial_identity\nradial_c = 0\n");
  EXPECT_EQ(run(p, dir_ / "out"), kExitMonitorFail);
  EXPECT_NE(read_text(dir_ / "out" / "monitor_report.txt").find("radial_identity verdict=fail"), std::string::npos);
}

TEST_F(Runner, ConfigAndIoErrors) {
  EXPECT_EQ(run(dir_ / "missing.ini", dir_ / "out"), kExitIo);
  write_text(dir_ / "syntax.ini", "[flow-solver]\nt_end = soon\n");
  EXPECT_EQ(run(dir_ / "syntax.ini", dir_ / "out"), kExitConfig);
  write_text(dir_ / "blocker", "a file where a directory should go");
  EXPECT_EQ(run(config("ok.ini"), dir_ / "blocker" / "out"), kExitIo);
}

TEST_F(Runner, SplitAndResumeMatchesUnsplit) {
  const auto full = config("full.ini");
  ASSERT_EQ(run(full, dir_ / "full"), kExitPass);
  std::string half_text = kBase;
  half_text.replace(half_text.find("t_end = 0.1"), 11, "t_end = 0.05");
  write_text(dir_ / "half.ini", half_text);
  ASSERT_EQ(run(dir_ / "half.ini", dir_ / "half"), kExitPass);
  std::ostringstream o, e;
  ASSERT_EQ(cmd_resume(dir_ / "half/snapshots/snapshot_0001.txt", full, {}, dir_ / "resumed", o, e), kExitPass)
      << e.str();
  EXPECT_LE(final_gap(last_snapshot(dir_ / "full"), last_snapshot(dir_ / "resumed")), 1e-10);
  EXPECT_NE(read_text(dir_ / "resumed/summary.txt").find("resumed = yes"), std::string::npos);
}

TEST_F(Runner, ResumeChecks) {
  const auto full = config("full.ini");
  ASSERT_EQ(run(full, dir_ / "full"), kExitPass);
  const fs::path snap = dir_ / "full/snapshots/snapshot_0001.txt";
  std::string text = read_text(snap);
  std::ostringstream o, e;

  std::string corrupt = text;
  corrupt.replace(corrupt.find("version=1"), 9, "version=9");
  write_text(dir_ / "corrupt.txt", corrupt);
  EXPECT_EQ(cmd_resume(dir_ / "corrupt.txt", full, {}, dir_ / "r1", o, e), kExitConfig);

  std::string other = text;
  other.replace(other.find("m=0.5"), 5, "m=0.75");
  write_text(dir_ / "other.txt", other);
  EXPECT_EQ(cmd_resume(dir_ / "other.txt", full, {}, dir_ / "r2", o, e), kExitConfig);

  const auto imex = config("imex.ini", "scheme = imex-cn\ndt_max = 0.001\n");
  e.str("");
  EXPECT_EQ(cmd_resume(snap, imex, {}, dir_ / "r3", o, e), kExitPass);
  EXPECT_NE(e.str().find("warning"), std::string::npos);
  EXPECT_NE(read_text(dir_ / "r3/summary.txt").find("scheme_changed = yes"), std::string::npos);
}

TEST_F(Runner, IdenticalConfigsGiveIdenticalBytes) {
  const auto p = config("a.ini");
  ASSERT_EQ(run(p, dir_ / "one"), kExitPass);
  ASSERT_EQ(run(p, dir_ / "two"), kExitPass);
  for (const char* f : {"series.csv", "monitor_report.txt", "summary.txt", "snapshots/snapshot_0002.txt"}) {
    EXPECT_EQ(read_text(dir_ / "one" / f), read_text(dir_ / "two" / f)) << f;
  }
}

TEST_F(Runner, SweepRunsEveryEntryIntoItsHashDirectory) {
  write_text(dir_ / "sweep.ini", std::string(kBase) + "[sweep]\nbackground-solutions.rho_amplitude = 0.05, 0.1\n");
  std::ostringstream o, e;
  EXPECT_EQ(cmd_sweep(dir_ / "sweep.ini", {}, dir_ / "sw", 2, o, e), kExitPass) << e.str();
  const auto entries = parse_sweep(read_text(dir_ / "sweep.ini"));
  ASSERT_EQ(entries.size(), 2u);
  for (const auto& c : entries) EXPECT_TRUE(fs::exists(dir_ / "sw" / c.hash_hex() / "summary.txt"));
  EXPECT_LT(o.str().find("entry 0"), o.str().find("entry 1"));
  // a sweep entry equals the plain run of the same config
  ASSERT_EQ(run(config("single.ini"), dir_ / "single"), kExitPass);
  EXPECT_EQ(read_text(dir_ / "single/series.csv"), read_text(dir_ / "sw" / entries[1].hash_hex() / "series.csv"));
}

TEST_F(Runner, ValidateRhoExitCodes) {
  std::ostringstream o, e;
  EXPECT_EQ(cmd_validate_rho(config("ok.ini"), o, e), 0);
  std::string text = kBase;
  text.replace(text.find("rho_family = poly-saturating\n"), 29,
               "rho_family = custom-table\nrho_table_t = 0, 1, 2, 3\nrho_table_value = 0, 0.1, 0.05, 0.2\n"
               "rho_t_ramp = 0.5\n");
  write_text(dir_ / "dip.ini", text);
  o.str("");
  EXPECT_EQ(cmd_validate_rho(dir_ / "dip.ini", o, e), 1);
  EXPECT_NE(o.str().find("monotone"), std::string::npos);
  text.replace(text.find("0, 0.1, 0.05, 0.2"), 17, "0, 0.1, 0.099999999999999, 0.2");
  write_text(dir_ / "flat.ini", text);
  EXPECT_EQ(cmd_validate_rho(dir_ / "flat.ini", o, e), 2);
}

TEST_F(Runner, StationaryOracleAndLadderShape) {
  const fs::path p = dir_ / "m1.ini";
  write_text(p, "[geometry-core]\nn_points = 129\n[background-solutions]\nn = 3\nm = 1\nrho_family = zero\n"
                "[flow-solver]\nformulation = arclength\nt_end = 0.1\nsnapshot_interval = 0.05\n");
  const RunConfig c = load_config(p);
  const OracleReport rep = run_oracle(c, 2, false);
  EXPECT_TRUE(rep.stationary);
  EXPECT_TRUE(rep.passed) << rep.to_text();
  ASSERT_EQ(rep.levels.size(), 2u);
  EXPECT_EQ(rep.levels[0].cells, 64u);
  for (const auto& lv : rep.levels) EXPECT_LE(lv.error(), 1e-8);
  EXPECT_THROW(run_oracle(c, 4, false), Error);  // 128 / 8 is below the grid minimum
}
