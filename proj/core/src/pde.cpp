#include "hmflow/pde.hpp"

#include <cmath>
#include <string>

#include "hmflow/errors.hpp"
#include "hmflow/geometry.hpp"

namespace hmflow {

void TridiagFactor::factor(int n, double r) {
  diag_.assign(n, 0.0);
  lower_.assign(n, 0.0);
  upper_.assign(n, 0.0);
  // Row pattern of I - r*D2 with reflection rows: [1+r, -r] at both ends,
  // [-r, 1+2r, -r] inside. Diagonally dominant, no pivoting needed.
  std::vector<double> d(n), c(n - 1), s(n - 1);
  for (int i = 0; i < n; ++i) d[i] = (i == 0 || i == n - 1) ? 1.0 + r : 1.0 + 2.0 * r;
  for (int i = 0; i + 1 < n; ++i) c[i] = s[i] = -r;
  diag_[0] = d[0];
  for (int i = 1; i < n; ++i) {
    lower_[i] = s[i - 1] / diag_[i - 1];
    diag_[i] = d[i] - lower_[i] * c[i - 1];
    upper_[i - 1] = c[i - 1];
  }
}

void TridiagFactor::solve(double* x) const {
  const int n = size();
  for (int i = 1; i < n; ++i) x[i] -= lower_[i] * x[i - 1];
  x[n - 1] /= diag_[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - upper_[i] * x[i + 1]) / diag_[i];
}

DiffusionSolver::DiffusionSolver(GridPtr grid, double dt) : grid_(std::move(grid)), dt_(dt) {
  if (!(dt > 0.0)) throw DomainError("diffusion: dt must be positive");
  fx_.factor(grid_->nx, dt / (grid_->dx * grid_->dx));
  if (grid_->dim == 2) fy_.factor(grid_->ny, dt / (grid_->dy * grid_->dy));
}

void DiffusionSolver::sweep_x(double* base, int ncomp) const {
  const int nx = grid_->nx, ny = grid_->ny;
  std::vector<double> line(nx);
  for (int c = 0; c < ncomp; ++c) {
    for (int j = 0; j < ny; ++j) {
      double* row = base + static_cast<std::size_t>(ncomp) * grid_->index(0, j);
      for (int i = 0; i < nx; ++i) line[i] = row[static_cast<std::size_t>(ncomp) * i + c];
      fx_.solve(line.data());
      for (int i = 0; i < nx; ++i) row[static_cast<std::size_t>(ncomp) * i + c] = line[i];
    }
  }
}

void DiffusionSolver::sweep_y(double* base, int ncomp) const {
  const int nx = grid_->nx, ny = grid_->ny;
  std::vector<double> line(ny);
  for (int c = 0; c < ncomp; ++c) {
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j)
        line[j] = base[static_cast<std::size_t>(ncomp) * grid_->index(i, j) + c];
      fy_.solve(line.data());
      for (int j = 0; j < ny; ++j)
        base[static_cast<std::size_t>(ncomp) * grid_->index(i, j) + c] = line[j];
    }
  }
}

void DiffusionSolver::solve_inplace(double* base, int ncomp, bool transposed) const {
  if (grid_->dim == 1) {
    sweep_x(base, ncomp);
    return;
  }
  // The x and y line operators commute, so either order inverts the same
  // product; running the transposed solve in reverse order makes it the
  // exact adjoint of the forward sweep sequence.
  if (!transposed) {
    sweep_x(base, ncomp);
    sweep_y(base, ncomp);
  } else {
    sweep_y(base, ncomp);
    sweep_x(base, ncomp);
  }
}

namespace {

// Reflection ghosts make the boundary central difference one-sided.
inline int clamp_lo(int i) { return i > 0 ? i - 1 : 0; }
inline int clamp_hi(int i, int n) { return i < n - 1 ? i + 1 : n - 1; }

struct GradScratch {
  // Per-axis derivative of every component at one node.
  double gx[3], gy[3];
};

template <int C>
inline void node_gradient(const Grid& g, const double* data, int i, int j, GradScratch& out) {
  const double inv2dx = 0.5 / g.dx;
  const int il = g.index(clamp_lo(i), j), ir = g.index(clamp_hi(i, g.nx), j);
  for (int c = 0; c < C; ++c)
    out.gx[c] = (data[static_cast<std::size_t>(C) * ir + c] - data[static_cast<std::size_t>(C) * il + c]) * inv2dx;
  if (g.dim == 2) {
    const double inv2dy = 0.5 / g.dy;
    const int jd = g.index(i, clamp_lo(j)), ju = g.index(i, clamp_hi(j, g.ny));
    for (int c = 0; c < C; ++c)
      out.gy[c] = (data[static_cast<std::size_t>(C) * ju + c] - data[static_cast<std::size_t>(C) * jd + c]) * inv2dy;
  } else {
    for (int c = 0; c < C; ++c) out.gy[c] = 0.0;
  }
}

}  // namespace

ChartGradients chart_gradients(const ChartField& v) {
  const Grid& g = *v.grid;
  const int n = g.count();
  ChartGradients out;
  out.g11.resize(n);
  out.g12.resize(n);
  out.g22.resize(n);
  GradScratch s;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int node = g.index(i, j);
      node_gradient<2>(g, v.data.data(), i, j, s);
      out.g11[node] = s.gx[0] * s.gx[0] + s.gy[0] * s.gy[0];
      out.g12[node] = s.gx[0] * s.gx[1] + s.gy[0] * s.gy[1];
      out.g22[node] = s.gx[1] * s.gx[1] + s.gy[1] * s.gy[1];
    }
  }
  return out;
}

template <int C, class Tag>
Field<C, Tag> neumann_laplacian(const Field<C, Tag>& f) {
  const Grid& g = *f.grid;
  Field<C, Tag> out(f.grid);
  const double ax = 1.0 / (g.dx * g.dx);
  const double ay = g.dim == 2 ? 1.0 / (g.dy * g.dy) : 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int node = g.index(i, j);
      const double* u = f.node(node);
      const double* ul = f.node(g.index(clamp_lo(i), j));
      const double* ur = f.node(g.index(clamp_hi(i, g.nx), j));
      double* o = out.node(node);
      for (int c = 0; c < C; ++c) o[c] = ax * (ul[c] - 2.0 * u[c] + ur[c]);
      if (g.dim == 2) {
        const double* ud = f.node(g.index(i, clamp_lo(j)));
        const double* uu = f.node(g.index(i, clamp_hi(j, g.ny)));
        for (int c = 0; c < C; ++c) o[c] += ay * (ud[c] - 2.0 * u[c] + uu[c]);
      }
    }
  }
  return out;
}

template <int C, class Tag>
double sup_gradient_norm(const Field<C, Tag>& f) {
  const Grid& g = *f.grid;
  double worst = 0.0;
  GradScratch s;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      node_gradient<C>(g, f.data.data(), i, j, s);
      double q = 0.0;
      for (int c = 0; c < C; ++c) q += s.gx[c] * s.gx[c] + s.gy[c] * s.gy[c];
      worst = std::max(worst, q);
    }
  }
  return std::sqrt(worst);
}

template <int C, class Tag>
double l2_norm(const Field<C, Tag>& f) {
  double acc = 0.0;
  for (double x : f.data) acc += x * x;
  return std::sqrt(acc * f.grid->cell_volume());
}

template <int C, class Tag>
double sup_norm(const Field<C, Tag>& f) {
  double worst = 0.0;
  for (int i = 0; i < f.count(); ++i) {
    const double* u = f.node(i);
    double q = 0.0;
    for (int c = 0; c < C; ++c) q += u[c] * u[c];
    worst = std::max(worst, q);
  }
  return std::sqrt(worst);
}

Stepper::Stepper(GridPtr grid, double dt) : grid_(std::move(grid)), dt_(dt), diff_(grid_, dt) {}

double Stepper::step_director(DirectorField& d, const MagneticField& h) const {
  const Grid& g = *grid_;
  // The explicit part must read the frozen pre-step state everywhere; an
  // in-place sweep would feed updated left neighbors into the gradient
  // stencil and bias the update along the sweep direction.
  const std::vector<double> old = d.data;
  GradScratch s;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int node = g.index(i, j);
      node_gradient<3>(g, old.data(), i, j, s);
      double grad2 = 0.0;
      for (int c = 0; c < 3; ++c) grad2 += s.gx[c] * s.gx[c] + s.gy[c] * s.gy[c];
      const double* dn0 = old.data() + static_cast<std::size_t>(3) * node;
      double* dn = d.node(node);
      const double* hn = h.node(node);
      const double hd = dn0[0] * hn[0] + dn0[1] * hn[1] + dn0[2] * hn[2];
      const double cd = grad2 - hd * hd;
      for (int c = 0; c < 3; ++c) dn[c] = dn0[c] + dt_ * (cd * dn0[c] + hd * hn[c]);
    }
  }
  diff_.solve_inplace(d.data.data(), 3);
  double drift = 0.0;
  for (int node = 0; node < g.count(); ++node) {
    double* dn = d.node(node);
    const double ns = dn[0] * dn[0] + dn[1] * dn[1] + dn[2] * dn[2];
    drift = std::max(drift, std::abs(ns - 1.0));
    const double inv = 1.0 / std::sqrt(ns);
    for (int c = 0; c < 3; ++c) dn[c] *= inv;
  }
  if (drift > 0.1) {
    throw StabilityError("step_director: norm drift " + std::to_string(drift) +
                         " exceeds blowup threshold; reduce dt");
  }
  return drift;
}

void Stepper::step_chart(ChartField& v, const ControlDensity* f) const {
  const Grid& g = *grid_;
  // Frozen pre-step state for the explicit part; see step_director.
  const std::vector<double> old = v.data;
  GradScratch s;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int node = g.index(i, j);
      node_gradient<2>(g, old.data(), i, j, s);
      const double g11 = s.gx[0] * s.gx[0] + s.gy[0] * s.gy[0];
      const double g12 = s.gx[0] * s.gx[1] + s.gy[0] * s.gy[1];
      const double g22 = s.gx[1] * s.gx[1] + s.gy[1] * s.gy[1];
      const double tr = g11 + g22;
      const double* vn0 = old.data() + static_cast<std::size_t>(2) * node;
      double* vn = v.node(node);
      const double hh = 1.0 + vn0[0] * vn0[0] + vn0[1] * vn0[1];
      double n1 = (-4.0 * (vn0[0] * g11 + vn0[1] * g12) + 2.0 * tr * vn0[0]) / hh;
      double n2 = (-4.0 * (vn0[0] * g12 + vn0[1] * g22) + 2.0 * tr * vn0[1]) / hh;
      if (f != nullptr && g.in_omega(node)) {
        const double* fn = f->node(node);
        n1 += fn[0];
        n2 += fn[1];
      }
      vn[0] = vn0[0] + dt_ * n1;
      vn[1] = vn0[1] + dt_ * n2;
    }
  }
  diff_.solve_inplace(v.data.data(), 2);
  for (int node = 0; node < g.count(); ++node) {
    const double* vn = v.node(node);
    if (std::abs(vn[0]) > kChartCap || std::abs(vn[1]) > kChartCap) {
      throw ChartBlowupError("step_chart: chart magnitude exceeded cap, trajectory near pole");
    }
  }
}

void Stepper::step_linearized(LinearState& y, const std::vector<Mat2>& a, const ControlDensity* u,
                              bool adjoint, LinearState* mu_out) const {
  const Grid& g = *grid_;
  if (static_cast<int>(a.size()) != g.count()) {
    throw DomainError("step_linearized: coefficient slab size mismatch");
  }
  if (!adjoint) {
    for (int node = 0; node < g.count(); ++node) {
      double* yn = y.node(node);
      const Vec2 ay = a[node].apply({yn[0], yn[1]});
      double u1 = 0.0, u2 = 0.0;
      if (u != nullptr && g.in_omega(node)) {
        const double* un = u->node(node);
        u1 = un[0];
        u2 = un[1];
      }
      yn[0] += dt_ * (ay.x + u1);
      yn[1] += dt_ * (ay.y + u2);
    }
    diff_.solve_inplace(y.data.data(), 2);
  } else {
    diff_.solve_inplace(y.data.data(), 2, /*transposed=*/true);
    if (mu_out != nullptr) *mu_out = y;
    for (int node = 0; node < g.count(); ++node) {
      double* yn = y.node(node);
      const Vec2 at = a[node].apply_transposed({yn[0], yn[1]});
      yn[0] += dt_ * at.x;
      yn[1] += dt_ * at.y;
    }
  }
  for (double x : y.data) {
    if (!std::isfinite(x)) throw StabilityError("step_linearized: state is no longer finite");
  }
}

// Explicit instantiations for the field types used across the library.
template Field<3, DirectorTag> neumann_laplacian(const Field<3, DirectorTag>&);
template Field<3, MagneticTag> neumann_laplacian(const Field<3, MagneticTag>&);
template Field<2, ChartTag> neumann_laplacian(const Field<2, ChartTag>&);
template Field<2, LinearTag> neumann_laplacian(const Field<2, LinearTag>&);

template double sup_gradient_norm(const Field<3, DirectorTag>&);
template double sup_gradient_norm(const Field<2, ChartTag>&);
template double sup_gradient_norm(const Field<2, LinearTag>&);

template double l2_norm(const Field<3, DirectorTag>&);
template double l2_norm(const Field<2, ChartTag>&);
template double l2_norm(const Field<2, ControlTag>&);
template double l2_norm(const Field<2, LinearTag>&);

template double sup_norm(const Field<3, DirectorTag>&);
template double sup_norm(const Field<3, MagneticTag>&);
template double sup_norm(const Field<2, ChartTag>&);
template double sup_norm(const Field<2, ControlTag>&);
template double sup_norm(const Field<2, LinearTag>&);

}  // namespace hmflow
