#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"
#include "cli/run.hpp"

int main(int argc, char** argv) {
  using namespace mixedop::cli;
  CLI::App app{"Mixed local-nonlocal operator toolkit"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::optional<long long> seed;
  for (const std::string& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--seed", seed, "random seed (overrides [solver] seed)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", overrides.out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--tol", overrides.tol, "solver tolerance (overrides [solver] tol)");
    sub->add_option("--max-iter", overrides.max_iter, "iteration cap (overrides [solver] max_iter)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (seed) overrides.seed = static_cast<std::uint64_t>(*seed);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    cfg = apply_overrides(parse_config(config_path), overrides);
  } catch (const ConfigError& e) {
    std::cerr << nlohmann::json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }
  return run(subcommand, cfg);
}
