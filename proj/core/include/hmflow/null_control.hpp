#pragma once

#include <vector>

#include "hmflow/grid.hpp"
#include "hmflow/pde.hpp"
#include "hmflow/smallmat.hpp"

namespace hmflow {

// Per-node 2x2 coupling matrix of the linearization around a chart
// trajectory, evaluated for one time slab:
// gamma_ij = (-4 grad v_i . grad v_j + 2 |grad v|^2 delta_ij) / (1 + |v|^2).
std::vector<Mat2> coefficient_matrix(const ChartField& v);

struct HumResult {
  std::vector<ControlDensity> u;  // one slab per time step, supported in omega
  double terminal_norm = 0.0;     // L2 norm of y(T) after control
  double cost = 0.0;              // L2(Q) norm of the control
  double sup_control = 0.0;       // max |u| observed (reported, not asserted)
  int iterations = 0;
  bool converged = false;
};

// Penalized least-squares null control of the linearized system: minimizes
// J(u) = 1/2 ||u||^2_{L2(omega x (0,T))} + 1/(2 penalty) ||y(T)||^2_{L2}
// by conjugate gradient in control space, with the gradient supplied by the
// exact discrete adjoint. a holds one coefficient slab per time step; the
// step count and horizon come from a.size() and stepper.dt().
HumResult hum_null_control(const Stepper& stepper, const std::vector<std::vector<Mat2>>& a,
                           const LinearState& y0, double penalty, double tol, int maxit);

// Value and gradient of the penalized functional
// J(u) = 1/2 ||u||^2_{L2(omega x (0,T))} + 1/(2 penalty) ||y(T; u)||^2_{L2}
// at an arbitrary control, gradient taken in the control-space inner product.
// Exposed so the adjoint sweep can be checked against finite differences of
// the directly-simulated cost.
struct CostGradient {
  double cost = 0.0;
  std::vector<ControlDensity> grad;
};
CostGradient hum_cost_gradient(const Stepper& stepper, const std::vector<std::vector<Mat2>>& a,
                               const LinearState& y0, const std::vector<ControlDensity>& u,
                               double penalty);

struct PicardResult {
  HumResult hum;
  std::vector<ChartField> trajectory;  // fixed-point chart trajectory, size steps+1
  double terminal_norm = 0.0;
  double last_change = 0.0;  // sup-norm change of the final sweep
  int outer_iterations = 0;
  bool converged = false;
};

// Fixed-point outer loop around the penalized control: freeze the current
// trajectory, assemble its linearization coefficients, solve for a control,
// re-simulate the driven linear system, repeat until the trajectory stops
// moving. Non-convergence is reported through the flag, not an exception:
// it signals initial data outside the local smallness basin.
PicardResult picard_null_control(const Stepper& stepper, const ChartField& v0, int steps,
                                 double penalty, double hum_tol, int hum_maxit,
                                 double outer_tol, int outer_maxit);

}  // namespace hmflow
