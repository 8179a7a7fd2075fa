#pragma once

#include <vector>

#include "hmflow/grid.hpp"
#include "hmflow/smallmat.hpp"

namespace hmflow {

// The stiffest explicitly-treated term has zero-order coefficient Lambda^2,
// so the explicit part of the splitting is stepped no faster than this.
inline double stable_dt(double lambda_max) {
  return 0.25 / (1.0 + lambda_max * lambda_max);
}

// LU factors of the symmetric tridiagonal matrix I - r*D2, where D2 is the
// second-difference matrix with reflection (Neumann) boundary rows.
class TridiagFactor {
 public:
  void factor(int n, double r);
  // In-place solve on a contiguous line.
  void solve(double* x) const;
  int size() const { return static_cast<int>(diag_.size()); }

 private:
  std::vector<double> diag_, lower_, upper_;
};

// Backward-Euler diffusion solve (I - dt*Lap_h)^{-1} applied per component.
// In 2D the operator factorizes into commuting x and y line solves; the
// transposed solve runs the sweeps in reverse order.
class DiffusionSolver {
 public:
  DiffusionSolver(GridPtr grid, double dt);
  void solve_inplace(double* base, int ncomp, bool transposed = false) const;
  double dt() const { return dt_; }

 private:
  void sweep_x(double* base, int ncomp) const;
  void sweep_y(double* base, int ncomp) const;
  GridPtr grid_;
  double dt_;
  TridiagFactor fx_, fy_;
};

// Per-node products of chart gradients: g11 = grad v1 . grad v1, etc.
struct ChartGradients {
  std::vector<double> g11, g12, g22;
};
ChartGradients chart_gradients(const ChartField& v);

// Second-order centered Laplacian with reflection ghosts.
template <int C, class Tag>
Field<C, Tag> neumann_laplacian(const Field<C, Tag>& f);

// Max over nodes of the Frobenius norm of the spatial gradient.
template <int C, class Tag>
double sup_gradient_norm(const Field<C, Tag>& f);

// Quadrature-weighted L2 norm (midpoint rule, uniform weights).
template <int C, class Tag>
double l2_norm(const Field<C, Tag>& f);

// Max over nodes of the Euclidean norm of the per-node vector.
template <int C, class Tag>
double sup_norm(const Field<C, Tag>& f);

// Semi-implicit splitting: zero-order and gradient terms explicit, diffusion
// implicit through the factorized solver. One Stepper serves the director,
// chart, and linearized systems at a fixed dt.
class Stepper {
 public:
  Stepper(GridPtr grid, double dt);

  double dt() const { return dt_; }
  const GridPtr& grid() const { return grid_; }
  const DiffusionSolver& diffusion() const { return diff_; }

  // One step of the director system. Returns the pre-renormalization norm
  // drift max| |d|^2 - 1 |; throws StabilityError when it exceeds 0.1.
  double step_director(DirectorField& d, const MagneticField& h) const;

  // One step of the chart system; f may be null for the uncontrolled flow.
  // Throws ChartBlowupError when max|v| exceeds the chart cap.
  void step_chart(ChartField& v, const ControlDensity* f) const;

  // One step of the linearized system y' - Lap y = a y + chi_omega u.
  // Adjoint mode applies the exact transpose of the forward step
  // (no control injection); mu_out, when given, receives the diffusion
  // backsolve of the incoming state, which is the multiplier the control
  // gradient needs.
  void step_linearized(LinearState& y, const std::vector<Mat2>& a, const ControlDensity* u,
                       bool adjoint = false, LinearState* mu_out = nullptr) const;

 private:
  GridPtr grid_;
  double dt_;
  DiffusionSolver diff_;
};

}  // namespace hmflow
