// Command-line front end for the experiment runners.

#include "cascade/config.hpp"
#include "cascade/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::size_t workers = 0;
  std::optional<std::uint64_t> seed;
};

int run(cascade::ExperimentKind kind, const Flags& flags) {
  cascade::ExperimentConfig cfg;
  try {
    cfg = cascade::load_config(flags.config, kind);
  } catch (const cascade::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!flags.out.empty()) cfg.output_dir = flags.out;
  if (flags.workers > 0) cfg.workers = flags.workers;
  if (flags.seed) cfg.seed = *flags.seed;

  try {
    const cascade::RunResult result = cascade::run_experiment(cfg);
    std::cout << result.console;
    for (const auto& p : result.points)
      if (!p.ok) std::cerr << "point " << p.label << " failed: " << p.error << "\n";
    std::cerr << "manifest: " << result.manifest.string() << "\n";
    return result.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangling two atoms through cascaded cavities: simulations and sweeps"};
  app.footer(cascade::config_reference());
  app.set_version_flag("--version", cascade::artifact_version());
  app.require_subcommand(1);

  Flags flags;
  std::optional<cascade::ExperimentKind> chosen;
  const std::pair<const char*, const char*> commands[] = {
      {"evolve", "time series of fidelity and related metrics from |0,0>"},
      {"sweep-eps", "steady fidelity over a grid of a/b and epsilon"},
      {"sweep-coop", "steady fidelity versus cooperativity at fixed Raman rates"},
      {"steady", "analytic and numeric steady states and their difference"},
      {"metrics", "metrics of a stored density matrix"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory (overrides output.dir)");
    sub->add_option("--workers", flags.workers, "concurrent sweep points (overrides run.workers)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "seed (overrides run.seed)");
    sub->footer(cascade::config_reference());
    sub->callback([&chosen, n = std::string(name)] { chosen = cascade::parse_experiment_kind(n); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(*chosen, flags);
}
