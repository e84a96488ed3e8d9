// Command-line front end: optimize | sweep | robust | gradcheck | trajectory.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qht/harness.hpp"
#include "qht/rng.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<int64_t> seed;
  std::optional<int> restarts;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration (JSON)")
      ->required();
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--restarts", args.restarts,
                  "Override the config restart count");
  cmd->add_option("--jobs", args.jobs, "Worker threads (0 = default)");
}

qht::RunConfig load(const CommonArgs& args) {
  qht::RunConfig config = qht::load_run_config(args.config_path);
  if (args.seed) {
    config.seed = static_cast<uint64_t>(*args.seed);
    config.grape.seed = config.seed;
    config.anneal.seed = qht::derive_seed(config.seed, 1);
  }
  if (args.restarts) {
    if (*args.restarts < 1)
      throw qht::ConfigError("config: restarts must be >= 1");
    config.restarts = *args.restarts;
  }
  if (args.jobs > 0) qht::set_max_threads(args.jobs);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control-pulse optimization for single-qubit binary "
               "hypothesis testing under Markovian noise"};
  app.require_subcommand(1);

  CommonArgs optimize_args, sweep_args, robust_args, gradcheck_args,
      trajectory_args;
  std::string controls_path;

  CLI::App* optimize =
      app.add_subcommand("optimize", "Run one pulse optimization");
  add_common(optimize, optimize_args);
  CLI::App* sweep =
      app.add_subcommand("sweep", "Optimize across a parameter sweep");
  add_common(sweep, sweep_args);
  CLI::App* robust = app.add_subcommand(
      "robust", "Train nominal + robust pulses and compare over a detuning window");
  add_common(robust, robust_args);
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Validate analytic gradients against finite differences");
  add_common(gradcheck, gradcheck_args);
  CLI::App* trajectory =
      app.add_subcommand("trajectory", "Export Bloch-vector time series");
  add_common(trajectory, trajectory_args);
  trajectory->add_option("--controls", controls_path,
                         "Pulse CSV (defaults to the config's initial pulse)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed())
      return qht::cmd_optimize(load(optimize_args), optimize_args.out_dir);
    if (sweep->parsed())
      return qht::cmd_sweep(load(sweep_args), sweep_args.out_dir);
    if (robust->parsed())
      return qht::cmd_robust(load(robust_args), robust_args.out_dir);
    if (gradcheck->parsed())
      return qht::cmd_gradcheck(load(gradcheck_args), gradcheck_args.out_dir);
    if (trajectory->parsed())
      return qht::cmd_trajectory(load(trajectory_args), controls_path,
                                 trajectory_args.out_dir);
  } catch (const qht::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return qht::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return qht::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return qht::kExitNumericalFailure;
  }
  return qht::kExitConfigError;
}
