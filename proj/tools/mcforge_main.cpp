#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mcforge/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mcforge: deterministic Bayesian sampling experiments"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "List the experiment registry");

  mcforge::ExperimentSpec spec;
  std::size_t n = 0;
  double eps = 0.0, scale = 0.0, quantile = 0.0;
  std::size_t steps = 0;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment");
  run_cmd->add_option("name", spec.name, "Experiment name (see `mcforge list`)")->required();
  run_cmd->add_option("--seed", spec.seed, "Random seed");
  auto* n_opt = run_cmd->add_option("--n", n, "Sample size / iteration count override");
  auto* eps_opt = run_cmd->add_option("--eps", eps, "Step size or tolerance override");
  auto* steps_opt = run_cmd->add_option("--steps", steps, "Leapfrog step count override");
  auto* scale_opt = run_cmd->add_option("--scale", scale, "Proposal scale override");
  auto* q_opt = run_cmd->add_option("--quantile", quantile, "ABC tolerance quantile override");
  run_cmd->add_option("--out", spec.out_dir, "Output directory");
  run_cmd->add_flag("--full", spec.full, "Restore full-scale sample sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (list_cmd->parsed()) {
    for (const auto& [name, desc] : mcforge::list_experiments())
      std::printf("%-22s %s\n", name.c_str(), desc.c_str());
    return 0;
  }

  if (n_opt->count()) spec.n = n;
  if (eps_opt->count()) spec.eps = eps;
  if (steps_opt->count()) spec.steps = steps;
  if (scale_opt->count()) spec.scale = scale;
  if (q_opt->count()) spec.quantile = quantile;

  try {
    mcforge::run_experiment(spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
