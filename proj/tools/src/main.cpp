#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dendrite/error.hpp"
#include "dendrite_cli/commands.hpp"
#include "dendrite_cli/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite element solver for the MHD phase-field alloy model"};
  app.require_subcommand(1);

  std::string config_path;
  int jobs = 0;
  bool deterministic = false;

  const char* commands[][2] = {
      {"mesh-stats", "print h, element and boundary-edge counts of the study meshes"},
      {"convergence", "spatial convergence study (rates in h)"},
      {"temporal", "temporal convergence study (rates in tau)"},
      {"stability", "random-perturbation stability study"},
      {"run", "single transient solve with snapshots and slices"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config,--config", config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--jobs", jobs, "parallel runs within a study")->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic", deterministic, "serial execution with reproducible output files");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  dendrite::cli::RunConfig config;
  try {
    if (!config_path.empty()) config = dendrite::cli::load_config(config_path);
    if (jobs > 0) config.jobs = jobs;
    if (deterministic) config.deterministic = true;
    config.validate();
  } catch (const dendrite::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dendrite::cli::kExitValidation;
  }
  return dendrite::cli::run_command(command, config, std::cout, std::cerr);
}
