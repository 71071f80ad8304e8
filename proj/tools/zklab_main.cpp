#include <iostream>

#include "CLI11.hpp"
#include "zklab/commands.hpp"
#include "zklab/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical instruments for minimal-mass dynamics of the 2D Zakharov-Kuznetsov equation"};
  app.require_subcommand(1);
  std::string config_path, out;
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--config", config_path, "config file (key = value [unit])");
  app.add_option("--out", out, "output root; overrides the config");
  app.add_option("--seed", seed, "seed; overrides the config");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag_function(
      "--print-config", [](std::int64_t) {
        std::cout << zk::to_text(zk::RunConfig{});
        std::exit(0);
      },
      "print the default config and exit");
  app.fallthrough();
  for (const auto& v : zk::verbs()) app.add_subcommand(v);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const zk::RunConfig cfg = config_path.empty() ? zk::RunConfig{} : zk::load_config(config_path);
    zk::CommandOptions o;
    if (app.count("--out")) o.out = out;
    if (app.count("--seed")) o.seed = seed;
    o.jobs = jobs;
    const std::string verb = app.get_subcommands().front()->get_name();
    const zk::CommandResult r = zk::run_verb(verb, cfg, o);
    std::cout << r.dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "zklab: " << e.what() << "\n";
    return zk::exit_code_for(e);
  }
}
