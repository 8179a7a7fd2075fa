// Command line runner. Exit codes: 0 all monitors passed, 1 a monitor or
// convergence check failed (artifacts still written), 2 configuration or
// solver error.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hmflow/config.hpp"
#include "hmflow/errors.hpp"
#include "hmflow/experiments.hpp"
#include "hmflow/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"steered harmonic map heat flow laboratory"};
  app.set_version_flag("--version", std::string(hmflow::kVersion));

  std::string experiment;
  std::string config_path;
  std::string out_dir;
  long long seed = 0;
  std::vector<std::string> overrides;
  app.add_option("experiment", experiment,
                 "experiment to run: verify-geometry, stage1, equivalence, hum, steer "
                 "(overrides run.experiment)");
  app.add_option("-c,--config", config_path, "configuration file (INI sections)");
  app.add_option("-s,--seed", seed, "random seed (overrides run.seed)");
  app.add_option("-o,--out", out_dir, "artifact directory (overrides run.out)");
  app.add_option("--set", overrides, "extra section.key=value overrides")
      ->type_name("KEY=VALUE");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    hmflow::Config cfg = config_path.empty() ? hmflow::Config::parse_string("")
                                             : hmflow::Config::parse_file(config_path);
    if (!experiment.empty()) cfg.set("run.experiment", experiment);
    if (app.count("--seed") > 0) cfg.set("run.seed", std::to_string(seed));
    if (!out_dir.empty()) cfg.set("run.out", out_dir);
    for (const std::string& kv : overrides) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw hmflow::ConfigError("--set expects section.key=value, got: " + kv);
      }
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    const hmflow::RunResult r = hmflow::run_experiment(cfg);
    std::fputs(r.text().c_str(), stdout);
    return r.exit_code;
  } catch (const hmflow::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
