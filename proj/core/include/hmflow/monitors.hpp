#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hmflow/grid.hpp"
#include "hmflow/smallmat.hpp"
#include "hmflow/stage_control.hpp"

namespace hmflow {

// Discrete solvers realize the continuous bounds only up to grid effects;
// sup-norm bound checks carry this relative slack, and refinement studies
// assert that the excess shrinks.
inline constexpr double kGridSlack = 0.05;

// Per-step time series recorded along a simulation. One entry per accepted
// step, including the initial state at t=0 (where the backward-difference
// time derivative is recorded as 0).
struct TrajectoryReport {
  std::vector<double> time;
  std::vector<double> lambda;      // applied uniform-field amplitude
  std::vector<double> norm_dev;    // max | |d|^2 - 1 | after renormalization
  std::vector<double> margin;      // min d . e against the leg axis
  std::vector<double> sup_grad;    // sup |grad d|
  std::vector<double> sup_dtd;     // sup |d_t d| by backward differences
  std::vector<double> energy;      // quadrature of (|grad d|^2 - (H.d)^2)/2
  std::vector<double> chart_sup;   // max |v| when a chart trajectory is tracked
  std::vector<double> bernstein;   // diagnostic quotient, reported not asserted

  std::size_t size() const { return time.size(); }
  // Index of the sample nearest to t.
  std::size_t index_at(double t) const;
};

// min over nodes of d . e.
double hemisphere_margin(const DirectorField& d, Vec3 e);

// max over time of sup|grad d(t)| / ((2/eps0) sup|grad d0|); 0 when the
// initial gradient vanishes. Throws DomainError when eps0 <= 0.
double gradient_bound_ratio(const TrajectoryReport& traj, double sup_grad0, double eps0);

// max over t in (t1, t2] of sup|d_t d(t)| / (eps1^{-1} sup|d_t d(t1)|) where
// eps1 is the hemisphere margin at t1; 0 for a stationary trajectory.
// The comparison argument behind this bound requires the field amplitude to
// be constant on the window, so callers evaluate it per constant stage.
double time_derivative_monotone(const TrajectoryReport& traj, double t1, double t2);

// Midpoint-rule quadrature of (|grad d|^2 - (H.d)^2)/2.
double energy(const DirectorField& d, const MagneticField& h);

// Diagnostic Bernstein quotient max_x (|grad d|^2/2) / (d.e - delta0)^2 with
// delta0 = eps0/2; reported, not asserted.
double bernstein_quotient(const DirectorField& d, Vec3 e, double eps0);

// measured = 1 - margin at 3T0; bound = exp(-Lambda^2 * margin(2T0) * T0).
std::pair<double, double> decay_check(const TrajectoryReport& traj, const Schedule& s);

// CSV serialization: header comment lines ("# key: value"), then one fixed
// column-order row per step.
std::string report_csv(const TrajectoryReport& traj, const std::string& config_hash,
                       std::uint64_t seed, const std::string& version);

}  // namespace hmflow
