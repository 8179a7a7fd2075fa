#pragma once

#include "hmflow/grid.hpp"
#include "hmflow/smallmat.hpp"

namespace hmflow {

// The symmetric matrix A(v) of the per-node algebraic system A(v) H = rhs
// that converts a chart-space control density into a magnetic field.
// Eigenvalues are {-h/2, h/2, h/2} with h = 1 + |v|^2.
Mat3 build_synthesis_matrix(Vec2 v);

// Solves A(v) H = (f1, f2, -h/2) in closed form (adjugate over determinant).
Vec3 synthesize_node(Vec2 v, Vec2 f);

// Per-node synthesis over a field: H solves the system with right side
// (f1, f2, -h/2) inside omega and is identically zero outside (exact zeros).
MagneticField synthesize_field(const ChartField& v, const ControlDensity& f);

// Residual of the original algebraic relation at one node:
// max component of (h^2/4) (H.d) J^T H - chi_omega f with d = stereo_project(v).
// Evaluated through the chart Jacobian, not the synthesis matrix, so the two
// routes check each other.
double synthesis_residual_node(Vec2 v, Vec2 f, Vec3 h, bool in_omega);

// Max of synthesis_residual_node over all nodes. Zero up to round-off for
// synthesized fields.
double synthesis_residual(const ChartField& v, const ControlDensity& f, const MagneticField& h);

// H(x) = lambda * axis at every node. Requires lambda >= 0.
MagneticField uniform_field(const GridPtr& grid, double lambda, Vec3 axis);

}  // namespace hmflow
