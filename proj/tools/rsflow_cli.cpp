// Command-line front end: run, validate-rho, oracle, resume, sweep.
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "rsflow/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rotationally symmetric normalized Ricci flow on a geodesic ball"};
  app.require_subcommand(1);

  std::string config, snapshot, out;
  bool override_gate = false;
  int levels = 3;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "config file (INI)")->required();
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory (default: [cli-runner] out_dir)");
    sub->add_flag("--override-rho-gate", override_gate, "run even if rho fails validation");
  };

  auto* run = app.add_subcommand("run", "integrate, monitor and write outputs");
  add_common(run);
  add_out(run);
  auto* validate = app.add_subcommand("validate-rho", "check rho against the growth and positivity hypotheses");
  add_common(validate);
  auto* oracle = app.add_subcommand("oracle", "compare against the background on a refinement ladder");
  add_common(oracle);
  oracle->add_option("--refine-levels", levels, "ladder levels (finest = config grid)")->check(CLI::Range(2, 6));
  auto* resume = app.add_subcommand("resume", "continue a run from a snapshot");
  add_common(resume);
  add_out(resume);
  resume->add_option("--snapshot", snapshot, "snapshot file")->required()->check(CLI::ExistingFile);
  auto* sweep = app.add_subcommand("sweep", "run every entry of a sweep file");
  add_common(sweep);
  add_out(sweep);
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version exit 0; usage errors join the config-error code
    const int code = app.exit(e);
    return code == 0 ? 0 : rsflow::kExitConfig;
  }

  rsflow::RunOptions options;
  options.override_rho_gate = override_gate;
  const std::optional<std::filesystem::path> out_dir =
      out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);

  if (*run) return rsflow::cmd_run(config, options, out_dir, std::cout, std::cerr);
  if (*validate) return rsflow::cmd_validate_rho(config, std::cout, std::cerr);
  if (*oracle) return rsflow::cmd_oracle(config, levels, std::cout, std::cerr);
  if (*resume) return rsflow::cmd_resume(snapshot, config, options, out_dir, std::cout, std::cerr);
  return rsflow::cmd_sweep(config, options, out_dir, jobs, std::cout, std::cerr);
}
