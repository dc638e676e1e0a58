#include <gtest/gtest.h>

#include <filesystem>

#include "rsflow/config.hpp"
#include "rsflow/error.hpp"
#include "rsflow/io.hpp"

using namespace rsflow;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::Domain;
}

constexpr const char* kSmall = R"(; short radial run
[geometry-core]
n_points = 65

[background-solutions]
n = 3
m = 2
rho_family = poly-saturating
rho_amplitude = 0.05
rho_order = 2

[flow-solver]
formulation = radial
t_end = 0.5
snapshot_times = 0, 0.1, 0.5

[invariant-monitors]
enabled = ordering, convexity
radial_c = 20

[cli-runner]
out_dir = somewhere
)";

}  // namespace

TEST(Config, ParsesEverySection) {
  const RunConfig c = parse_config(kSmall);
  EXPECT_EQ(c.n_points, 65u);
  EXPECT_EQ(c.model.n, 3);
  EXPECT_DOUBLE_EQ(c.model.m, 2.0);
  EXPECT_EQ(c.rho.family, RhoFamily::PolySaturating);
  EXPECT_DOUBLE_EQ(c.rho.amplitude, 0.05);
  EXPECT_EQ(c.formulation, Formulation::Radial);
  EXPECT_EQ(c.snapshot_times, (std::vector<double>{0.0, 0.1, 0.5}));
  EXPECT_EQ(c.monitors.enabled, (std::vector<std::string>{"ordering", "convexity"}));
  EXPECT_DOUBLE_EQ(c.monitors.radial_c, 20.0);
  EXPECT_EQ(c.out_dir, "somewhere");
}

TEST(Config, RoundTripIsStable) {
  const RunConfig c = parse_config(kSmall);
  const std::string text = serialize(c);
  const RunConfig back = parse_config(text);
  EXPECT_EQ(serialize(back), text);
  EXPECT_EQ(back.hash(), c.hash());
  // doubles survive the text form exactly
  RunConfig odd = c;
  odd.model.m = 0.1 + 0.2;
  odd.scheme.cfl_factor = 1.0 / 3.0;
  const RunConfig odd_back = parse_config(serialize(odd));
  EXPECT_EQ(odd_back.model.m, odd.model.m);
  EXPECT_EQ(odd_back.scheme.cfl_factor, odd.scheme.cfl_factor);
}

TEST(Config, HashIgnoresOutputLocation) {
  RunConfig a = parse_config(kSmall);
  RunConfig b = a;
  b.out_dir = "elsewhere";
  b.formats = {"summary"};
  EXPECT_EQ(a.hash(), b.hash());
  b.model.m = 2.5;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash_hex().size(), 16u);
}

TEST(Config, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
}

TEST(Config, Errors) {
  EXPECT_EQ(kind_of([] { parse_config("[flow-solver]\nbogus = 1\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { parse_config("[nowhere]\nn = 1\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { parse_config("[background-solutions]\nm = abc\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { parse_config("[flow-solver]\nformulation = spectral\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { parse_config("[flow-solver\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { load_config("/nonexistent/run.ini"); }), ErrorKind::Io);
}

TEST(Config, Validation) {
  RunConfig c = parse_config(kSmall);
  EXPECT_NO_THROW(c.validate());
  RunConfig bad = c;
  bad.formulation = Formulation::Conformal;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.formulation = Formulation::Arclength;
  bad.scheme.kind = SchemeKind::ImexCn;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.n_points = 32;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.snapshot_times = {0.0, 2.0};
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.formats = {"hdf5"};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Sweep, CartesianProductLastKeyFastest) {
  const std::string text = std::string(kSmall) +
                           "\n[sweep]\nbackground-solutions.m = 0.5, 2\n"
                           "background-solutions.rho_amplitude = 0.05, 0.1, 0.2\n";
  const auto entries = parse_sweep(text);
  ASSERT_EQ(entries.size(), 6u);
  EXPECT_DOUBLE_EQ(entries[0].model.m, 0.5);
  EXPECT_DOUBLE_EQ(entries[0].rho.amplitude, 0.05);
  EXPECT_DOUBLE_EQ(entries[1].rho.amplitude, 0.1);
  EXPECT_DOUBLE_EQ(entries[3].model.m, 2.0);
  EXPECT_DOUBLE_EQ(entries[5].rho.amplitude, 0.2);
  for (std::size_t i = 1; i < entries.size(); ++i) EXPECT_NE(entries[i].hash(), entries[0].hash());
  EXPECT_THROW(parse_sweep(std::string(kSmall) + "\n[sweep]\nflow-solver.nope = 1, 2\n"), Error);
}

TEST(Snapshot, RadialRoundTripIsBitExact) {
  const RunConfig c = parse_config(kSmall);
  RadialMetricState s = initial_state(RadialGrid(1.0, 65), 3, 2.0);
  s.t = 0.123456789012345678;
  s.a[10] = 1.0 / 3.0;
  const Snapshot back = parse_snapshot(format_snapshot(s, c));
  const auto& r = std::get<RadialMetricState>(back.state);
  EXPECT_EQ(r.t, s.t);
  EXPECT_EQ(r.a, s.a);
  EXPECT_EQ(r.b, s.b);
  EXPECT_EQ(back.header.at("config_hash"), c.hash_hex());
  EXPECT_EQ(back.header.at("scheme"), "explicit-rk4");
}

TEST(Snapshot, ArclengthAndConformalRoundTrip) {
  RunConfig c = parse_config(kSmall);
  const ArclengthState arc = initial_arclength_state(RadialGrid(1.0, 65), 32, 3, 2.0);
  const auto back = std::get<ArclengthState>(parse_snapshot(format_snapshot(arc, c)).state);
  EXPECT_EQ(back.B, arc.B);
  EXPECT_EQ(back.label_x, arc.label_x);
  EXPECT_EQ(back.alpha, arc.alpha);

  ConformalState u = initial_conformal_state(RadialGrid(1.0, 65), {2, 0.5, 1.0});
  u.u[3] = 1e-17;
  const auto ub = std::get<ConformalState>(parse_snapshot(format_snapshot(u, c)).state);
  EXPECT_EQ(ub.u, u.u);
  EXPECT_EQ(ub.model.n, 2);
}

TEST(Snapshot, CorruptedInputsAreConfigErrors) {
  const RunConfig c = parse_config(kSmall);
  const std::string good = format_snapshot(initial_state(RadialGrid(1.0, 65), 3, 2.0), c);
  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  for (const std::string& bad :
       {std::string("garbage\n"), replaced("version=1", "version=7"), replaced("end-header\n", ""),
        replaced("n_points=65", "n_points=sixty"), replaced("vector b 65", "vector b 66"),
        replaced("formulation=radial", "formulation=unknown"), good.substr(0, good.size() / 2)}) {
    EXPECT_EQ(kind_of([&] { parse_snapshot(bad); }), ErrorKind::Config);
  }
}

TEST(Series, RoundTrip) {
  std::vector<TimeSeriesRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    recs[i].t = 0.1 * i;
    recs[i].volume = 5.0 + i / 3.0;
    recs[i].sup_f1_compact = 1e-3 / (i + 1);
    recs[i].u_min = -0.01 * i;
  }
  for (bool with_u : {false, true}) {
    const std::string text = format_series(recs, "00ff", with_u);
    EXPECT_EQ(text.rfind("# rsflow time-series version=1 config_hash=00ff\n", 0), 0u);
    const auto back = parse_series(text);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[2].volume, recs[2].volume);
    EXPECT_EQ(back[1].sup_f1_compact, recs[1].sup_f1_compact);
    EXPECT_EQ(back[2].u_min, with_u ? recs[2].u_min : 0.0);
  }
  EXPECT_EQ(series_columns(true).back(), "u_min");
}

TEST(Files, WriteCreatesDirectoriesAndReportsIo) {
  const auto dir = std::filesystem::temp_directory_path() / "rsflow_io_test";
  std::filesystem::remove_all(dir);
  write_text(dir / "a" / "b.txt", "hello");
  EXPECT_EQ(read_text(dir / "a" / "b.txt"), "hello");
  EXPECT_EQ(kind_of([&] { write_text(dir / "a" / "b.txt" / "c.txt", "x"); }), ErrorKind::Io);
  EXPECT_EQ(kind_of([&] { read_text(dir / "missing"); }), ErrorKind::Io);
  std::filesystem::remove_all(dir);
}
