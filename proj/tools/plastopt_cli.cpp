#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plastopt/errors.hpp"
#include "plastopt/runner.hpp"
#include "plastopt/threading.hpp"

int main(int argc, char** argv) {
  CLI::App app{"phase-field topology optimization of elastoplastic bodies"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;  // 0: keep the runtime default

  CLI::App* forward = app.add_subcommand("forward", "solve one quasistatic evolution");
  CLI::App* optimize = app.add_subcommand("optimize", "run the phase-field descent");
  CLI::App* lab = app.add_subcommand("lab", "run the study selected in the config");
  CLI::App* check = app.add_subcommand("check", "property suite on a built-in tiny fixture");

  for (CLI::App* sub : {forward, optimize, lab}) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (default: config 'output')");
    sub->add_option("--threads", threads, "cap on parallel workers");
  }
  unsigned long long check_seed = 0;
  check->add_option("--out", out_dir, "output directory (default: 'out')");
  check->add_option("--threads", threads, "cap on parallel workers");
  check->add_option("--seed", check_seed, "seed for the randomized properties");

  CLI11_PARSE(app, argc, argv);
  plastopt::set_num_threads(threads);

  try {
    if (check->parsed()) {
      const auto outcome =
          plastopt::run_check(check_seed, out_dir.empty() ? "out" : out_dir, std::cout);
      std::cout << "manifest: " << outcome.manifest_path << "\n";
      return outcome.exit_code;
    }

    const plastopt::RunConfig cfg = plastopt::parse_config(config_path);
    const std::string mode = app.get_subcommands().front()->get_name();
    const auto outcome =
        plastopt::run(cfg, mode, out_dir.empty() ? cfg.output : out_dir, config_path);
    for (const auto& e : outcome.manifest.errors) std::cerr << "error: " << e << "\n";
    std::cout << "manifest: " << outcome.manifest_path << "\n";
    return outcome.exit_code;
  } catch (const plastopt::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
