#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hmflow/config.hpp"
#include "hmflow/grid.hpp"
#include "hmflow/monitors.hpp"
#include "hmflow/pde.hpp"
#include "hmflow/stage_control.hpp"

namespace hmflow {

struct RunResult {
  int exit_code = 0;  // 0: all monitors pass, 1: monitor violation
  std::vector<std::pair<std::string, std::string>> summary;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  std::string text() const;
  // Numeric lookup; throws Error when the key is absent or non-numeric.
  double number(const std::string& key) const;
  const std::string& str(const std::string& key) const;
};

// Builds the configured initial director data on the grid. Presets:
// constant, tilted-cone, random-smooth, file (see the [initial] section of
// the config schema). Throws ConfigError for invalid preset parameters,
// including cone angles of 90 degrees or more.
DirectorField initial_data(const Config& cfg, const GridPtr& grid, std::uint64_t seed);

// Grid from the [grid] section.
GridPtr grid_from_config(const Config& cfg);

// Runs the experiment named by run.experiment: verify-geometry, stage1,
// equivalence, hum, or steer. Deterministic given (config, seed); writes
// report/summary/snapshot artifacts under run.out when set.
RunResult run_experiment(const Config& cfg);

// --- building blocks shared with the verification suites ---

// Per-leg evaluation of the runtime bounds over report rows (k0, k1].
struct MonitorVerdict {
  bool margin_ok = true;
  bool gradient_ok = true;
  bool dtd_ok = true;
  bool energy_ok = true;
  bool norm_ok = true;
  bool decay_ok = true;
  double gradient_ratio = 0.0;
  double worst_dtd_ratio = 0.0;
  double min_margin = 1.0;
  double max_norm_dev = 0.0;
  double decay_measured = 0.0;
  double decay_bound = 1.0;
  bool all_ok() const {
    return margin_ok && gradient_ok && dtd_ok && energy_ok && norm_ok && decay_ok;
  }
};

// Advances the five uniform-field stages of a leg, appending one report row
// per step with absolute times t_abs0 + k*dt. eps0 is the hemisphere margin
// of d against s.target at entry; rows record margins against s.target.
void run_uniform_stages(const Stepper& st, DirectorField& d, const Schedule& s,
                        int steps_per_stage, double t_abs0, double eps0, TrajectoryReport& rep);

// Evaluates the maximum-principle bounds over the leg recorded in rows
// (k0, k1] of rep, anchored at entry margin eps0 and entry gradient
// sup_grad0. Time-derivative windows are restricted to the constant-field
// stages, where the underlying comparison argument applies.
MonitorVerdict check_uniform_leg(const TrajectoryReport& rep, std::size_t k0, std::size_t k1,
                                 const Schedule& s, double t_abs0, double eps0, double sup_grad0);

}  // namespace hmflow
