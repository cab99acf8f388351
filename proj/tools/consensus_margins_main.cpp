#include <CLI11.hpp>
#include <cstdint>
#include <iostream>

#include "margins/cli.hpp"
#include "margins/errors.hpp"

namespace {

void add_common_flags(CLI::App* sub, margins::CliOptions& options) {
  sub->add_option("--config", options.config_path, "analysis config (JSON)")
      ->required();
  sub->add_option("--out", options.out_dir, "output directory");
  sub->add_flag("--csv", options.csv, "also write per-frequency CSV output");
  sub->add_option("--seed", options.seed, "multi-start random seed");
  sub->add_flag("--strict", options.strict,
                "exit 3 when the report contains warnings");
  sub->add_option("--tau", options.tau, "input delay to simulate (seconds)");
  sub->add_option("--delta", options.delta_path,
                  "perturbation matrix file to validate");
  sub->add_option("--grid-points", options.grid_points,
                  "frequency grid resolution");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Gain, phase, and delay margins of linear consensus networks over "
      "directed graphs"};
  app.require_subcommand(1);

  margins::CliOptions options;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "compute margins and write the report");
  CLI::App* validate = app.add_subcommand(
      "validate", "check perturbations and run time-domain simulations");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "dump frequency-response curves and set membership");
  for (CLI::App* sub : {analyze, validate, sweep})
    add_common_flags(sub, options);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return margins::cmd_analyze(options);
    if (validate->parsed()) return margins::cmd_validate(options);
    return margins::cmd_sweep(options);
  } catch (const margins::Error& e) {
    std::cerr << "error [" << margins::error_code_name(e.code())
              << "]: " << e.what() << "\n";
    return e.code() == margins::ErrorCode::AssumptionViolation ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
