#include "rsflow/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rsflow/error.hpp"

namespace rsflow {

double state_time(const SolverState& state) {
  return std::visit([](const auto& s) { return s.t; }, state);
}

Formulation formulation_of(const SolverState& state) {
  switch (state.index()) {
    case 0: return Formulation::Radial;
    case 1: return Formulation::Arclength;
    default: return Formulation::Conformal;
  }
}

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void put_vector(std::string& out, const char* name, const std::vector<double>& v) {
  out += "vector " + std::string(name) + " " + std::to_string(v.size()) + "\n";
  for (double x : v) out += g17(x) + "\n";
}

double to_double(const std::string& what, const std::string& text) {
  try {
    std::size_t used = 0;
    const double x = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, "snapshot: bad number for " + what + ": '" + text + "'");
  }
}

long to_long(const std::string& what, const std::string& text) {
  const double x = to_double(what, text);
  if (x != static_cast<double>(static_cast<long>(x))) {
    throw Error(ErrorKind::Config, "snapshot: " + what + " must be an integer");
  }
  return static_cast<long>(x);
}

}  // namespace

std::string format_snapshot(const SolverState& state, const RunConfig& config) {
  std::string out = "rsflow-snapshot\n";
  auto kv = [&](const char* k, const std::string& v) { out += std::string(k) + "=" + v + "\n"; };
  kv("version", std::to_string(kSnapshotVersion));
  kv("formulation", std::string(to_string(formulation_of(state))));
  kv("config_hash", config.hash_hex());
  kv("scheme", std::string(to_string(config.scheme.kind)));
  kv("t", g17(state_time(state)));
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConformalState>) {
          kv("n", std::to_string(s.model.n));
          kv("m", g17(s.model.m));
        } else {
          kv("n", std::to_string(s.n));
          kv("m", g17(s.m));
        }
        kv("r0", g17(s.grid.r0()));
        kv("n_points", std::to_string(s.grid.size()));
        if constexpr (std::is_same_v<T, ArclengthState>) kv("cells", std::to_string(s.cells()));
        out += "end-header\n";
        if constexpr (std::is_same_v<T, RadialMetricState>) {
          put_vector(out, "a", s.a);
          put_vector(out, "b", s.b);
        } else if constexpr (std::is_same_v<T, ArclengthState>) {
          put_vector(out, "B", s.B);
          put_vector(out, "label_x", s.label_x);
          put_vector(out, "alpha", s.alpha);
        } else {
          put_vector(out, "u", s.u);
        }
      },
      state);
  return out;
}

Snapshot parse_snapshot(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "rsflow-snapshot") {
    throw Error(ErrorKind::Config, "not a snapshot file");
  }
  Snapshot snap;
  bool closed = false;
  while (std::getline(in, line)) {
    if (line == "end-header") {
      closed = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Config, "snapshot header line without '=': " + line);
    snap.header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!closed) throw Error(ErrorKind::Config, "snapshot header is not terminated");
  auto need = [&](const char* key) -> const std::string& {
    auto it = snap.header.find(key);
    if (it == snap.header.end()) throw Error(ErrorKind::Config, std::string("snapshot header lacks ") + key);
    return it->second;
  };
  if (to_long("version", need("version")) != kSnapshotVersion) {
    throw Error(ErrorKind::Config, "snapshot version " + need("version") + " is not supported");
  }

  std::map<std::string, std::vector<double>> vectors;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream words(line);
    std::string tag, name;
    long count = -1;
    words >> tag >> name >> count;
    if (tag != "vector" || name.empty() || count < 0) {
      throw Error(ErrorKind::Config, "snapshot: expected a vector block, got '" + line + "'");
    }
    std::vector<double> v(static_cast<std::size_t>(count));
    for (auto& x : v) {
      if (!std::getline(in, line)) throw Error(ErrorKind::Config, "snapshot: vector " + name + " is truncated");
      x = to_double(name, line);
    }
    vectors[name] = std::move(v);
  }
  auto vec = [&](const char* name) -> std::vector<double>& {
    auto it = vectors.find(name);
    if (it == vectors.end()) throw Error(ErrorKind::Config, std::string("snapshot lacks vector ") + name);
    return it->second;
  };

  const Formulation f = parse_formulation(need("formulation"));
  const double t = to_double("t", need("t"));
  const int n = static_cast<int>(to_long("n", need("n")));
  const double m = to_double("m", need("m"));
  const double r0 = to_double("r0", need("r0"));
  const auto points = static_cast<std::size_t>(to_long("n_points", need("n_points")));
  try {
    const RadialGrid grid(r0, points);
    if (f == Formulation::Radial) {
      RadialMetricState s;
      s.t = t;
      s.n = n;
      s.m = m;
      s.grid = grid;
      s.a = std::move(vec("a"));
      s.b = std::move(vec("b"));
      s.validate();
      snap.state = std::move(s);
    } else if (f == Formulation::Arclength) {
      ArclengthState s;
      s.t = t;
      s.n = n;
      s.m = m;
      s.grid = grid;
      s.B = std::move(vec("B"));
      s.label_x = std::move(vec("label_x"));
      s.alpha = std::move(vec("alpha"));
      if (s.B.size() != static_cast<std::size_t>(to_long("cells", need("cells"))) + 1) {
        throw Error(ErrorKind::Config, "snapshot: cell count disagrees with vector B");
      }
      s.validate();
      snap.state = std::move(s);
    } else {
      ConformalState s;
      s.t = t;
      s.grid = grid;
      s.model = BackgroundModel{n, m, r0};
      s.u = std::move(vec("u"));
      s.validate();
      snap.state = std::move(s);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, std::string("snapshot state is invalid: ") + e.what());
  }
  return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path) { return parse_snapshot(read_text(path)); }

std::vector<std::string> series_columns(bool with_u_min) {
  std::vector<std::string> cols = {"t",      "dt",     "Vol",    "eta",    "H_boundary",
                                   "min_F1", "max_F1", "min_F2", "max_F2", "sup_F1_compact"};
  if (with_u_min) cols.push_back("u_min");
  return cols;
}

std::string format_series(const std::vector<TimeSeriesRecord>& records, const std::string& config_hash,
                          bool with_u_min) {
  std::string out = "# rsflow time-series version=" + std::to_string(kSnapshotVersion) +
                    " config_hash=" + config_hash + "\n";
  const auto cols = series_columns(with_u_min);
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& r : records) {
    const double row[] = {r.t,      r.dt,     r.volume, r.eta,    r.h_boundary,    r.min_f1,
                          r.max_f1, r.min_f2, r.max_f2, r.sup_f1_compact, r.u_min};
    const std::size_t width = with_u_min ? 11 : 10;
    for (std::size_t i = 0; i < width; ++i) out += (i ? "," : "") + g17(row[i]);
    out += "\n";
  }
  return out;
}

std::vector<TimeSeriesRecord> parse_series(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<TimeSeriesRecord> out;
  bool header_seen = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      if (width != 10 && width != 11) throw Error(ErrorKind::Config, "time series has an unexpected header");
      continue;
    }
    std::vector<double> v;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) v.push_back(to_double("series", cell));
    if (v.size() != width) throw Error(ErrorKind::Config, "time series row has the wrong width");
    TimeSeriesRecord r{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], width == 11 ? v[10] : 0.0};
    out.push_back(r);
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace rsflow
