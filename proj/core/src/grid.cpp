#include "hmflow/grid.hpp"

#include <cmath>
#include <string>

#include "hmflow/errors.hpp"

namespace hmflow {

int Grid::omega_count() const {
  int c = 0;
  for (auto m : omega) c += m;
  return c;
}

namespace {

void fill_omega(Grid& g, double fraction) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw DomainError("grid: omega fraction must lie in (0,1), got " + std::to_string(fraction));
  }
  const double x0 = 0.5 * g.lx * (1.0 - fraction), x1 = 0.5 * g.lx * (1.0 + fraction);
  const double y0 = 0.5 * g.ly * (1.0 - fraction), y1 = 0.5 * g.ly * (1.0 + fraction);
  g.omega.assign(g.count(), 0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const bool inx = g.x(i) > x0 && g.x(i) < x1;
      const bool iny = g.dim == 1 || (g.y(j) > y0 && g.y(j) < y1);
      g.omega[g.index(i, j)] = (inx && iny) ? 1 : 0;
    }
  }
  if (g.omega_count() == 0) {
    throw DomainError("grid: control region contains no nodes at this resolution");
  }
  // The control region must stay strictly inside the domain.
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const bool boundary = i == 0 || i == g.nx - 1 || (g.dim == 2 && (j == 0 || j == g.ny - 1));
      if (boundary && g.omega[g.index(i, j)]) {
        throw DomainError("grid: control region touches the boundary");
      }
    }
  }
}

}  // namespace

GridPtr make_grid_1d(int nx, double lx, double omega_fraction) {
  if (nx < 3) throw DomainError("grid: need at least 3 nodes per axis");
  if (!(lx > 0.0)) throw DomainError("grid: extent must be positive");
  auto g = std::make_shared<Grid>();
  g->dim = 1;
  g->nx = nx;
  g->ny = 1;
  g->lx = lx;
  g->ly = 1.0;
  g->dx = lx / nx;
  g->dy = 1.0;
  fill_omega(*g, omega_fraction);
  return g;
}

GridPtr make_grid_2d(int nx, int ny, double lx, double ly, double omega_fraction) {
  if (nx < 3 || ny < 3) throw DomainError("grid: need at least 3 nodes per axis");
  if (!(lx > 0.0) || !(ly > 0.0)) throw DomainError("grid: extents must be positive");
  auto g = std::make_shared<Grid>();
  g->dim = 2;
  g->nx = nx;
  g->ny = ny;
  g->lx = lx;
  g->ly = ly;
  g->dx = lx / nx;
  g->dy = ly / ny;
  fill_omega(*g, omega_fraction);
  return g;
}

}  // namespace hmflow
