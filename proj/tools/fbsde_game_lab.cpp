#include <CLI11.hpp>
#include <iostream>

#include "fbsde/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace fbsde::cli;
  CLI::App app{"Partially observed FBSDE game laboratory"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  RunOptions opt;
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  for (const char* name : {"riccati", "filter-check", "equilibrium", "bsde-xcheck"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", opt.scenario_path, "scenario INI file")->required();
    sub->add_option("--out", opt.out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "override [mc] seed");
    sub->add_option("--paths", paths, "override [mc] n_paths");
    sub->add_flag("--zero-sum", opt.zero_sum, "run the saddle-point check (equilibrium)");
    sub->callback([&opt, sub, &seed, &paths] {
      opt.command = sub->get_name();
      if (sub->count("--seed")) opt.seed = seed;
      if (sub->count("--paths")) opt.paths = paths;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }
  if (opt.zero_sum && opt.command != "equilibrium") {
    std::cerr << "error: --zero-sum only applies to equilibrium\n";
    return kExitInputError;
  }
  return run_command(opt);
}
