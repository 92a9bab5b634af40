#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "dppdyn/cli_runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium birth-death and exchange dynamics for determinantal processes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  int replicas_override = 0;
  bool have_seed = false;
  bool have_replicas = false;

  const std::vector<std::string> commands = {"sample",   "simulate",     "verify",
                                             "spectrum", "correlations", "diagnose"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_override, "master seed override")
        ->each([&have_seed](const std::string&) { have_seed = true; });
    sub->add_option("--replicas", replicas_override, "replica count override")
        ->each([&have_replicas](const std::string&) { have_replicas = true; });
  }

  CLI11_PARSE(app, argc, argv);

  dppdyn::RunOverrides overrides;
  if (have_seed) overrides.seed = seed_override;
  if (have_replicas) overrides.replicas = replicas_override;
  if (!out_dir.empty()) {
    overrides.out_dir = out_dir;
  } else if (const char* env = std::getenv("DPPDYN_OUT")) {
    overrides.out_dir = env;
  }

  return dppdyn::run_command(app.get_subcommands().front()->get_name(), config_path,
                             overrides);
}
