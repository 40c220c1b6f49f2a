#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "harness.hpp"
#include "rarc/common.hpp"

namespace rarc::cli {

int main(int argc, char **argv) {
  CLI::App app{"Adaptive cubic regularization on manifolds: benchmark runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool slow_checks = false;
  bool parallel = false;
  CLI::App *run_cmd = app.add_subcommand("run", "Run the solvers of a config");
  run_cmd->add_option("config", config_path, "INI config file")->required();
  run_cmd->add_option("--seed", seed, "Override the configured seeds");
  run_cmd->add_flag("--slow-checks", slow_checks,
                    "Log points and check the step-norm bound");
  run_cmd->add_flag("--parallel", parallel, "Run seeds concurrently");

  std::string trace_dir;
  CLI::App *report_cmd =
      app.add_subcommand("report", "Write plot data for a trace directory");
  report_cmd->add_option("dir", trace_dir, "Directory of trace CSVs")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      RunConfig cfg = load_config(config_path);
      if (seed) cfg.seeds = {*seed};
      if (slow_checks) cfg.slow_checks = true;
      return run(cfg, std::cout, parallel);
    }
    return report(trace_dir, std::cout);
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace rarc::cli
