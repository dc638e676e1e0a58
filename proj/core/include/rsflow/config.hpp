#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rsflow/background.hpp"
#include "rsflow/flow_solver.hpp"
#include "rsflow/monitors.hpp"
#include "rsflow/rho.hpp"
#include "rsflow/validator.hpp"

namespace rsflow {

// radial: (a, b) on the fixed r-grid. arclength: b on an s-grid that moves
// with the metric (needed for long perturbed runs). conformal: u for n = 2.
enum class Formulation { Radial, Arclength, Conformal };

std::string_view to_string(Formulation f);
Formulation parse_formulation(std::string_view name);

// Everything a run needs. Sections of the text form:
//
//   [geometry-core]         n_points
//   [background-solutions]  n, m, r0, rho_*, validator_*
//   [flow-solver]           formulation, scheme, cfl_factor, dt_*, newton_*,
//                           cells, t_end, snapshot_interval | snapshot_times,
//                           series_interval
//   [invariant-monitors]    enabled, t_warmup, *_c, r_compact, window, ...
//   [cli-runner]            out_dir, formats
//
// Lists are comma separated. Keys left out keep their defaults; unknown
// sections or keys are errors.
struct RunConfig {
  BackgroundModel model{3, 0.5, 1.0};
  std::size_t n_points = 401;

  RhoSpec rho = RhoSpec::poly_saturating(0.1, 2);
  ValidatorConfig validator;

  Formulation formulation = Formulation::Arclength;
  SchemeConfig scheme;
  std::size_t cells = 0;  // arclength cells; 0 means n_points - 1
  double t_end = 1.0;
  double snapshot_interval = 0.25;
  std::vector<double> snapshot_times;  // overrides snapshot_interval when set
  double series_interval = 0.02;

  MonitorConfig monitors;

  std::string out_dir = "out";
  std::vector<std::string> formats = {"series", "snapshots", "report", "summary"};

  // Throws Error(Config) on any inconsistent field.
  void validate() const;

  std::size_t arclength_cells() const { return cells == 0 ? n_points - 1 : cells; }
  bool writes(std::string_view format) const;
  IntegrationSettings integration_settings() const;

  // FNV-1a of the canonical text without the [cli-runner] section, so the
  // output location does not change the identity of a run.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

std::string serialize(const RunConfig& config);
// Throws Error(Config) on syntax errors, unknown keys and bad values.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// A sweep file is a run config plus a [sweep] section whose keys name other
// keys as section.key and whose values are comma-separated alternatives.
// Entries are the Cartesian product, in file order with the last key varying
// fastest.
std::vector<RunConfig> parse_sweep(std::string_view text);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace rsflow
