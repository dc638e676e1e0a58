#include "rsflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rsflow/error.hpp"

namespace rsflow {

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::Radial: return "radial";
    case Formulation::Arclength: return "arclength";
    case Formulation::Conformal: return "conformal";
  }
  return "radial";
}

Formulation parse_formulation(std::string_view name) {
  if (name == "radial") return Formulation::Radial;
  if (name == "arclength") return Formulation::Arclength;
  if (name == "conformal") return Formulation::Conformal;
  throw Error(ErrorKind::Config, "unknown formulation '" + std::string(name) + "'");
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

// Shortest text that reads back to the same double.
std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::Config, key + ": expected a number, got '" + s + "'");
  }
  return x;
}

long parse_integer(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  long x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::Config, key + ": expected an integer, got '" + s + "'");
  }
  return x;
}

std::size_t parse_count(const std::string& key, std::string_view text) {
  const long x = parse_integer(key, text);
  if (x < 0) throw Error(ErrorKind::Config, key + " must be non-negative");
  return static_cast<std::size_t>(x);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(key, item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

std::string join(const std::vector<double>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + format_double(items[i]);
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define RSF_DOUBLE(sec, name, member)                                                  \
  Field {                                                                              \
    sec, name, [](const RunConfig& c) { return format_double(c.member); },             \
        [](RunConfig& c, const std::string& v) { c.member = parse_double(name, v); }   \
  }
#define RSF_INT(sec, name, member)                                                                  \
  Field {                                                                                           \
    sec, name, [](const RunConfig& c) { return std::to_string(c.member); },                         \
        [](RunConfig& c, const std::string& v) {                                                    \
          c.member = static_cast<decltype(c.member)>(parse_integer(name, v));                       \
        }                                                                                           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"geometry-core", "n_points",
            [](const RunConfig& c) { return std::to_string(c.n_points); },
            [](RunConfig& c, const std::string& v) { c.n_points = parse_count("n_points", v); }},

      RSF_INT("background-solutions", "n", model.n),
      RSF_DOUBLE("background-solutions", "m", model.m),
      RSF_DOUBLE("background-solutions", "r0", model.r0),
      Field{"background-solutions", "rho_family",
            [](const RunConfig& c) { return std::string(to_string(c.rho.family)); },
            [](RunConfig& c, const std::string& v) { c.rho.family = parse_rho_family(trim(v)); }},
      RSF_DOUBLE("background-solutions", "rho_amplitude", rho.amplitude),
      RSF_INT("background-solutions", "rho_order", rho.order),
      RSF_DOUBLE("background-solutions", "rho_t_ramp", rho.t_ramp),
      Field{"background-solutions", "rho_table_t", [](const RunConfig& c) { return join(c.rho.table_t); },
            [](RunConfig& c, const std::string& v) { c.rho.table_t = parse_doubles("rho_table_t", v); }},
      Field{"background-solutions", "rho_table_value",
            [](const RunConfig& c) { return join(c.rho.table_value); },
            [](RunConfig& c, const std::string& v) {
              c.rho.table_value = parse_doubles("rho_table_value", v);
            }},
      Field{"background-solutions", "rho_target",
            [](const RunConfig& c) { return std::string(to_string(c.validator.target)); },
            [](RunConfig& c, const std::string& v) { c.validator.target = parse_rho_target(trim(v)); }},
      RSF_DOUBLE("background-solutions", "validator_t_max", validator.t_max),
      RSF_INT("background-solutions", "validator_samples", validator.n_samples),
      RSF_DOUBLE("background-solutions", "validator_sigma", validator.sigma),
      RSF_DOUBLE("background-solutions", "validator_near_zero_window", validator.near_zero_window),
      RSF_DOUBLE("background-solutions", "validator_epsilon", validator.epsilon),
      RSF_DOUBLE("background-solutions", "validator_tail_start", validator.tail_start),
      RSF_DOUBLE("background-solutions", "validator_y0", validator.y0),
      RSF_DOUBLE("background-solutions", "validator_positivity_window", validator.positivity_window),

      Field{"flow-solver", "formulation", [](const RunConfig& c) { return std::string(to_string(c.formulation)); },
            [](RunConfig& c, const std::string& v) { c.formulation = parse_formulation(trim(v)); }},
      Field{"flow-solver", "scheme", [](const RunConfig& c) { return std::string(to_string(c.scheme.kind)); },
            [](RunConfig& c, const std::string& v) { c.scheme.kind = parse_scheme(trim(v)); }},
      RSF_DOUBLE("flow-solver", "cfl_factor", scheme.cfl_factor),
      RSF_DOUBLE("flow-solver", "dt_max", scheme.dt_max),
      RSF_DOUBLE("flow-solver", "dt_min", scheme.dt_min),
      RSF_DOUBLE("flow-solver", "newton_tol", scheme.newton_tol),
      RSF_INT("flow-solver", "newton_max_iter", scheme.newton_max_iter),
      Field{"flow-solver", "cells", [](const RunConfig& c) { return std::to_string(c.cells); },
            [](RunConfig& c, const std::string& v) { c.cells = parse_count("cells", v); }},
      RSF_DOUBLE("flow-solver", "t_end", t_end),
      RSF_DOUBLE("flow-solver", "snapshot_interval", snapshot_interval),
      Field{"flow-solver", "snapshot_times", [](const RunConfig& c) { return join(c.snapshot_times); },
            [](RunConfig& c, const std::string& v) { c.snapshot_times = parse_doubles("snapshot_times", v); }},
      RSF_DOUBLE("flow-solver", "series_interval", series_interval),

      Field{"invariant-monitors", "enabled", [](const RunConfig& c) { return join(c.monitors.enabled); },
            [](RunConfig& c, const std::string& v) { c.monitors.enabled = split_list(v); }},
      RSF_DOUBLE("invariant-monitors", "t_warmup", monitors.t_warmup),
      RSF_DOUBLE("invariant-monitors", "ordering_c", monitors.ordering_c),
      RSF_DOUBLE("invariant-monitors", "scaling_c", monitors.scaling_c),
      RSF_DOUBLE("invariant-monitors", "barrier_c", monitors.barrier_c),
      RSF_DOUBLE("invariant-monitors", "s_bound_c", monitors.s_bound_c),
      RSF_DOUBLE("invariant-monitors", "radial_c", monitors.radial_c),
      RSF_DOUBLE("invariant-monitors", "boundary_c", monitors.boundary_c),
      RSF_DOUBLE("invariant-monitors", "convexity_c", monitors.convexity_c),
      RSF_DOUBLE("invariant-monitors", "conformal_c", monitors.conformal_c),
      RSF_DOUBLE("invariant-monitors", "identity_rel", monitors.identity_rel),
      RSF_DOUBLE("invariant-monitors", "s_bound_fraction", monitors.s_bound_fraction),
      RSF_DOUBLE("invariant-monitors", "r_compact", monitors.r_compact),
      RSF_DOUBLE("invariant-monitors", "window", monitors.window),
      RSF_DOUBLE("invariant-monitors", "convergence_threshold", monitors.convergence_threshold),
      RSF_DOUBLE("invariant-monitors", "k_fit_tolerance", monitors.k_fit_tolerance),
      RSF_DOUBLE("invariant-monitors", "plateau_rel", monitors.plateau_rel),

      Field{"cli-runner", "out_dir", [](const RunConfig& c) { return c.out_dir; },
            [](RunConfig& c, const std::string& v) { c.out_dir = trim(v); }},
      Field{"cli-runner", "formats", [](const RunConfig& c) { return join(c.formats); },
            [](RunConfig& c, const std::string& v) { c.formats = split_list(v); }},
  };
  return table;
}

#undef RSF_DOUBLE
#undef RSF_INT

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

std::string canonical(const RunConfig& config, bool with_runner) {
  std::string out;
  std::string_view current;
  for (const auto& f : fields()) {
    if (!with_runner && std::string_view(f.section) == "cli-runner") continue;
    if (current != f.section) {
      if (!current.empty()) out += "\n";
      current = f.section;
      out += "[" + std::string(f.section) + "]\n";
    }
    const std::string value = f.get(config);
    out += std::string(f.key) + " =" + (value.empty() ? "" : " " + value) + "\n";
  }
  return out;
}

boost::property_tree::ptree read_ini(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::Config, std::string("config syntax: ") + e.what());
  }
  return tree;
}

RunConfig from_tree(const boost::property_tree::ptree& tree, bool allow_sweep) {
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (allow_sweep && section == "sweep") continue;
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorKind::Config, "key outside any section: " + section);
    }
    for (const auto& [key, value] : body) {
      const Field* f = find_field(section, key);
      if (!f) throw Error(ErrorKind::Config, "unknown key [" + section + "] " + key);
      f->set(config, value.data());
    }
  }
  config.rho.validate();
  config.validate();
  return config;
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  if (n_points < RadialGrid::kMinPoints) {
    throw Error(ErrorKind::Config, "n_points must be at least " + std::to_string(RadialGrid::kMinPoints));
  }
  scheme.validate();
  if (formulation == Formulation::Conformal && model.n != 2) {
    throw Error(ErrorKind::Config, "the conformal formulation needs n = 2");
  }
  if (formulation == Formulation::Arclength) {
    if (scheme.kind != SchemeKind::ExplicitRk4) {
      throw Error(ErrorKind::Config, "the arclength formulation only runs the explicit-rk4 scheme");
    }
    if (arclength_cells() < 16) throw Error(ErrorKind::Config, "arclength needs at least 16 cells");
  }
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::Config, "t_end must be positive");
  if (snapshot_times.empty() && !(snapshot_interval > 0.0)) {
    throw Error(ErrorKind::Config, "snapshot_interval must be positive");
  }
  for (double t : snapshot_times) {
    if (!(t >= 0.0) || t > t_end) throw Error(ErrorKind::Config, "snapshot times must lie in [0, t_end]");
  }
  if (!(series_interval > 0.0)) throw Error(ErrorKind::Config, "series_interval must be positive");
  if (!(monitors.r_compact > 0.0 && monitors.r_compact <= 1.0)) {
    throw Error(ErrorKind::Config, "r_compact must lie in (0, 1]");
  }
  if (!(monitors.window > 0.0)) throw Error(ErrorKind::Config, "window must be positive");
  for (const auto& id : monitors.enabled) {
    const auto& ids = all_check_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      throw Error(ErrorKind::Config, "unknown check: " + id);
    }
  }
  static const std::vector<std::string> known = {"series", "snapshots", "report", "summary"};
  for (const auto& f : formats) {
    if (std::find(known.begin(), known.end(), f) == known.end()) {
      throw Error(ErrorKind::Config, "unknown output format: " + f);
    }
  }
  if (out_dir.empty()) throw Error(ErrorKind::Config, "out_dir must not be empty");
}

bool RunConfig::writes(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

IntegrationSettings RunConfig::integration_settings() const {
  IntegrationSettings s;
  s.t_end = t_end;
  s.snapshot_times = snapshot_times.empty() ? cadence(snapshot_interval, t_end) : snapshot_times;
  s.series_interval = series_interval;
  s.r_compact = monitors.r_compact;
  return s;
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical(*this, false)); }

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::string serialize(const RunConfig& config) { return canonical(config, true); }

RunConfig parse_config(std::string_view text) { return from_tree(read_ini(text), false); }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<RunConfig> parse_sweep(std::string_view text) {
  const auto tree = read_ini(text);
  const auto sweep = tree.get_child_optional("sweep");
  if (!sweep || sweep->empty()) throw Error(ErrorKind::Config, "sweep file has no [sweep] entries");

  struct Axis {
    std::string section, key;
    std::vector<std::string> values;
  };
  std::vector<Axis> axes;
  for (const auto& [name, value] : *sweep) {
    const auto dot = name.find('.');
    if (dot == std::string::npos) throw Error(ErrorKind::Config, "sweep key must be section.key: " + name);
    Axis axis{name.substr(0, dot), name.substr(dot + 1), split_list(value.data())};
    if (!find_field(axis.section, axis.key)) throw Error(ErrorKind::Config, "unknown sweep key " + name);
    if (axis.values.empty()) throw Error(ErrorKind::Config, "sweep key without values: " + name);
    axes.push_back(std::move(axis));
  }

  std::vector<RunConfig> out;
  std::vector<std::size_t> index(axes.size(), 0);
  for (;;) {
    auto entry = tree;
    entry.erase("sweep");
    for (std::size_t k = 0; k < axes.size(); ++k) {
      // put() would read the dot as a path separator.
      auto& section = entry.get_child_optional(axes[k].section)
                          ? entry.get_child(axes[k].section)
                          : entry.add_child(axes[k].section, {});
      section.put(boost::property_tree::ptree::path_type(axes[k].key, '\0'), axes[k].values[index[k]]);
    }
    out.push_back(from_tree(entry, false));
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++index[k] < axes[k].values.size()) break;
      index[k] = 0;
      if (k == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

}  // namespace rsflow
