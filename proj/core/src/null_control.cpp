#include "hmflow/null_control.hpp"

#include <cmath>

#include "hmflow/errors.hpp"

namespace hmflow {

std::vector<Mat2> coefficient_matrix(const ChartField& v) {
  const ChartGradients g = chart_gradients(v);
  const int n = v.count();
  std::vector<Mat2> a(n);
  for (int i = 0; i < n; ++i) {
    const double* vn = v.node(i);
    const double hh = 1.0 + vn[0] * vn[0] + vn[1] * vn[1];
    const double tr = g.g11[i] + g.g22[i];
    a[i].a11 = (-4.0 * g.g11[i] + 2.0 * tr) / hh;
    a[i].a12 = -4.0 * g.g12[i] / hh;
    a[i].a21 = -4.0 * g.g12[i] / hh;
    a[i].a22 = (-4.0 * g.g22[i] + 2.0 * tr) / hh;
  }
  return a;
}

namespace {

// Control-space inner product: dt * sum_n <u_n, w_n>_h restricted to omega.
double control_dot(const std::vector<ControlDensity>& u, const std::vector<ControlDensity>& w,
                   const Grid& g, double dt) {
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    for (int i = 0; i < g.count(); ++i) {
      if (!g.in_omega(i)) continue;
      const double* un = u[k].node(i);
      const double* wn = w[k].node(i);
      acc += un[0] * wn[0] + un[1] * wn[1];
    }
  }
  return acc * dt * g.cell_volume();
}

LinearState run_forward(const Stepper& st, const std::vector<std::vector<Mat2>>& a,
                        const LinearState& y0, const std::vector<ControlDensity>* u) {
  LinearState y = y0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    st.step_linearized(y, a[k], u ? &(*u)[k] : nullptr);
  }
  return y;
}

// Adjoint sweep from terminal multiplier yT/penalty; writes the per-slab
// control-space gradient contribution chi_omega mu into g.
void adjoint_gradient(const Stepper& st, const std::vector<std::vector<Mat2>>& a,
                      const LinearState& yT, double penalty,
                      std::vector<ControlDensity>& g) {
  const Grid& grid = *st.grid();
  LinearState lambda = yT;
  for (double& x : lambda.data) x /= penalty;
  LinearState mu(yT.grid);
  for (std::size_t k = a.size(); k-- > 0;) {
    st.step_linearized(lambda, a[k], nullptr, /*adjoint=*/true, &mu);
    ControlDensity& gk = g[k];
    for (int i = 0; i < grid.count(); ++i) {
      double* gn = gk.node(i);
      if (grid.in_omega(i)) {
        const double* mn = mu.node(i);
        gn[0] = mn[0];
        gn[1] = mn[1];
      } else {
        gn[0] = 0.0;
        gn[1] = 0.0;
      }
    }
  }
}

std::vector<ControlDensity> zero_controls(const GridPtr& g, std::size_t n) {
  std::vector<ControlDensity> u;
  u.reserve(n);
  for (std::size_t k = 0; k < n; ++k) u.emplace_back(g);
  return u;
}

}  // namespace

CostGradient hum_cost_gradient(const Stepper& stepper, const std::vector<std::vector<Mat2>>& a,
                               const LinearState& y0, const std::vector<ControlDensity>& u,
                               double penalty) {
  if (!(penalty > 0.0)) throw DomainError("hum_cost_gradient: penalty must be positive");
  if (u.size() != a.size()) {
    throw DomainError("hum_cost_gradient: control and coefficient slab counts differ");
  }
  const GridPtr& grid = stepper.grid();
  const double dt = stepper.dt();
  const LinearState yT = run_forward(stepper, a, y0, &u);
  const double yn = l2_norm(yT);
  CostGradient out;
  out.cost = 0.5 * control_dot(u, u, *grid, dt) + 0.5 * yn * yn / penalty;
  out.grad = zero_controls(grid, u.size());
  adjoint_gradient(stepper, a, yT, penalty, out.grad);
  for (std::size_t k = 0; k < u.size(); ++k) {
    double* gn = out.grad[k].data.data();
    const double* un = u[k].data.data();
    for (int i = 0; i < grid->count(); ++i) {
      if (!grid->in_omega(i)) continue;
      gn[2 * i] += un[2 * i];
      gn[2 * i + 1] += un[2 * i + 1];
    }
  }
  return out;
}

HumResult hum_null_control(const Stepper& stepper, const std::vector<std::vector<Mat2>>& a,
                           const LinearState& y0, double penalty, double tol, int maxit) {
  if (!(penalty > 0.0)) throw DomainError("hum_null_control: penalty must be positive");
  const GridPtr& grid = stepper.grid();
  const double dt = stepper.dt();
  const std::size_t nsteps = a.size();

  HumResult res;
  res.u = zero_controls(grid, nsteps);

  // Normal equations in control space: (I + 1/penalty L* L) u = -1/penalty L* y_free(T),
  // where L maps a control to the terminal state it produces from zero data.
  const LinearState yfree = run_forward(stepper, a, y0, nullptr);
  std::vector<ControlDensity> r = zero_controls(grid, nsteps);
  adjoint_gradient(stepper, a, yfree, penalty, r);
  for (auto& rk : r)
    for (double& x : rk.data) x = -x;

  const double rn0 = control_dot(r, r, *grid, dt);
  if (rn0 == 0.0) {
    res.converged = true;
    res.terminal_norm = l2_norm(yfree);
    return res;
  }

  std::vector<ControlDensity> p = r;
  std::vector<ControlDensity> ap = zero_controls(grid, nsteps);
  LinearState zero_init(grid);
  double rn = rn0;
  int it = 0;
  while (it < maxit) {
    const LinearState lp = run_forward(stepper, a, zero_init, &p);
    adjoint_gradient(stepper, a, lp, penalty, ap);
    for (std::size_t k = 0; k < nsteps; ++k) {
      const double* pn = p[k].data.data();
      double* an = ap[k].data.data();
      for (std::size_t q = 0; q < ap[k].data.size(); ++q) an[q] += pn[q];
    }
    const double pap = control_dot(p, ap, *grid, dt);
    const double alpha = rn / pap;
    for (std::size_t k = 0; k < nsteps; ++k) {
      double* un = res.u[k].data.data();
      double* rk = r[k].data.data();
      const double* pn = p[k].data.data();
      const double* an = ap[k].data.data();
      for (std::size_t q = 0; q < r[k].data.size(); ++q) {
        un[q] += alpha * pn[q];
        rk[q] -= alpha * an[q];
      }
    }
    const double rn_new = control_dot(r, r, *grid, dt);
    ++it;
    if (std::sqrt(rn_new / rn0) <= tol) {
      rn = rn_new;
      res.converged = true;
      break;
    }
    const double beta = rn_new / rn;
    rn = rn_new;
    for (std::size_t k = 0; k < nsteps; ++k) {
      double* pn = p[k].data.data();
      const double* rk = r[k].data.data();
      for (std::size_t q = 0; q < p[k].data.size(); ++q) pn[q] = rk[q] + beta * pn[q];
    }
  }
  res.iterations = it;
  const LinearState yT = run_forward(stepper, a, y0, &res.u);
  res.terminal_norm = l2_norm(yT);
  double cost2 = 0.0, supu = 0.0;
  for (const auto& uk : res.u) {
    for (int i = 0; i < grid->count(); ++i) {
      const double* un = uk.node(i);
      const double m2 = un[0] * un[0] + un[1] * un[1];
      cost2 += m2;
      supu = std::max(supu, m2);
    }
  }
  res.cost = std::sqrt(cost2 * dt * grid->cell_volume());
  res.sup_control = std::sqrt(supu);
  return res;
}

PicardResult picard_null_control(const Stepper& stepper, const ChartField& v0, int steps,
                                 double penalty, double hum_tol, int hum_maxit,
                                 double outer_tol, int outer_maxit) {
  const GridPtr& grid = stepper.grid();
  PicardResult res;

  // Starting trajectory: the uncontrolled nonlinear chart flow.
  res.trajectory.clear();
  res.trajectory.reserve(steps + 1);
  {
    ChartField v = v0;
    res.trajectory.push_back(v);
    for (int k = 0; k < steps; ++k) {
      stepper.step_chart(v, nullptr);
      res.trajectory.push_back(v);
    }
  }

  LinearState y0(grid);
  y0.data = v0.data;

  std::vector<std::vector<Mat2>> a(steps);
  for (int outer = 0; outer < outer_maxit; ++outer) {
    // Coefficients frozen at the slab's start state.
    for (int k = 0; k < steps; ++k) a[k] = coefficient_matrix(res.trajectory[k]);
    res.hum = hum_null_control(stepper, a, y0, penalty, hum_tol, hum_maxit);

    // Re-simulate the driven linear system along the frozen coefficients.
    double change = 0.0;
    LinearState y = y0;
    {
      ChartField v = v0;
      for (int k = 0; k < steps; ++k) {
        stepper.step_linearized(y, a[k], &res.hum.u[k]);
        v.data = y.data;
        double* prev = res.trajectory[k + 1].data.data();
        for (std::size_t q = 0; q < v.data.size(); ++q) {
          change = std::max(change, std::abs(v.data[q] - prev[q]));
          prev[q] = v.data[q];
        }
      }
    }
    res.outer_iterations = outer + 1;
    res.last_change = change;
    if (change <= outer_tol) {
      res.converged = res.hum.converged;
      break;
    }
  }
  LinearState yT(grid);
  yT.data = res.trajectory.back().data;
  res.terminal_norm = l2_norm(yT);
  return res;
}

}  // namespace hmflow
