#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace hmflow {

// Cell-centered rectangular grid on [0,lx] (x [0,ly] in 2D) with node i at
// (i+1/2)*dx. Cell centering makes the midpoint quadrature weights uniform and
// the reflection-ghost Neumann Laplacian symmetric, which the discrete adjoint
// relies on.
struct Grid {
  int dim = 1;       // 1 or 2
  int nx = 0, ny = 1;
  double lx = 1.0, ly = 1.0;
  double dx = 0.0, dy = 0.0;
  std::vector<std::uint8_t> omega;  // control mask, 1 inside the control box

  int count() const { return nx * ny; }
  int index(int i, int j = 0) const { return j * nx + i; }
  double x(int i) const { return (i + 0.5) * dx; }
  double y(int j) const { return (j + 0.5) * dy; }
  double cell_volume() const { return dim == 1 ? dx : dx * dy; }
  bool in_omega(int node) const { return omega[node] != 0; }
  int omega_count() const;
};

using GridPtr = std::shared_ptr<const Grid>;

// Fraction is the covered portion of each axis extent; the control box is
// centered. Throws DomainError unless the resulting mask is nonempty and
// every masked node is an interior node.
GridPtr make_grid_1d(int nx, double lx = 1.0, double omega_fraction = 0.25);
GridPtr make_grid_2d(int nx, int ny, double lx = 1.0, double ly = 1.0,
                     double omega_fraction = 0.25);

// Per-node vector field. Components are interleaved: data[C*node + c].
template <int C, class Tag>
struct Field {
  GridPtr grid;
  std::vector<double> data;

  Field() = default;
  explicit Field(GridPtr g) : grid(std::move(g)), data(static_cast<std::size_t>(C) * grid->count(), 0.0) {}

  int count() const { return grid->count(); }
  double* node(int i) { return data.data() + static_cast<std::size_t>(C) * i; }
  const double* node(int i) const { return data.data() + static_cast<std::size_t>(C) * i; }
};

struct DirectorTag;
struct MagneticTag;
struct ChartTag;
struct ControlTag;
struct LinearTag;

// Unit 3-vectors d(x): the state of the director system.
using DirectorField = Field<3, DirectorTag>;
// Applied magnetic field H(x).
using MagneticField = Field<3, MagneticTag>;
// Stereographic coordinates v(x).
using ChartField = Field<2, ChartTag>;
// Chart-space control density f(x) supported in omega.
using ControlDensity = Field<2, ControlTag>;
// State y(x) of the linearized system.
using LinearState = Field<2, LinearTag>;

}  // namespace hmflow
