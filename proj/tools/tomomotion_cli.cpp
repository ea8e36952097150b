#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tomomotion/commands.hpp"
#include "tomomotion/types.hpp"

namespace fs = std::filesystem;
using namespace tomomotion;

int main(int argc, char** argv) {
  CLI::App app{"Rigid motion of a tomographic sample from its projections.\n"
               "Set TOMOMOTION_THREADS to cap the number of worker threads."};
  app.require_subcommand(1);

  std::string config, out_dir;
  auto* simulate = app.add_subcommand("simulate", "Render projections of a configured experiment");
  simulate->add_option("--config", config, "Run configuration (JSON)")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();

  std::string stack_dir, truth, estimate_out, estimator_config;
  auto* estimate = app.add_subcommand("estimate", "Estimate the motion from a stored stack");
  estimate->add_option("--stack", stack_dir, "Stack directory")->required();
  estimate->add_option("--truth", truth, "Truth CSV supplying the phantom center");
  estimate->add_option("--out", estimate_out, "Estimate CSV")->required();
  estimate->add_option("--config", estimator_config, "Run configuration with estimator settings");

  std::string suite, json_out;
  VerifyOptions verify_options;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("--suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(verify_suites()));
  verify->add_option("--json", json_out, "Report file");
  verify->add_option("--seed", verify_options.seed, "Seed of the random draws");
  verify->add_flag("--quick", verify_options.quick, "Reduced problem sizes");

  std::string compare_estimate, compare_truth, compare_out;
  auto* compare = app.add_subcommand("compare", "Per-frame errors of an estimate");
  compare->add_option("--estimate", compare_estimate, "Estimate CSV")->required();
  compare->add_option("--truth", compare_truth, "Truth CSV")->required();
  compare->add_option("--out", compare_out, "Error CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  const auto optional_path = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<fs::path>(s);
  };
  try {
    if (*simulate) return cmd_simulate(config, out_dir, std::cout);
    if (*estimate) {
      return cmd_estimate(stack_dir, optional_path(truth), estimate_out,
                          optional_path(estimator_config), std::cout);
    }
    if (*verify) return cmd_verify(suite, optional_path(json_out), verify_options, std::cout);
    if (*compare) return cmd_compare(compare_estimate, compare_truth, compare_out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
