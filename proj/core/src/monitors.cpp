#include "hmflow/monitors.hpp"

#include <cmath>
#include <cstdio>

#include "hmflow/errors.hpp"
#include "hmflow/pde.hpp"

namespace hmflow {

std::size_t TrajectoryReport::index_at(double t) const {
  std::size_t best = 0;
  double dist = std::abs(time.empty() ? 0.0 : time[0] - t);
  for (std::size_t k = 1; k < time.size(); ++k) {
    const double d = std::abs(time[k] - t);
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  return best;
}

double hemisphere_margin(const DirectorField& d, Vec3 e) {
  double worst = 1.0;
  for (int i = 0; i < d.count(); ++i) {
    const double* dn = d.node(i);
    worst = std::min(worst, dn[0] * e.x + dn[1] * e.y + dn[2] * e.z);
  }
  return worst;
}

double gradient_bound_ratio(const TrajectoryReport& traj, double sup_grad0, double eps0) {
  if (!(eps0 > 0.0)) throw DomainError("gradient_bound_ratio: margin must be positive");
  double peak = 0.0;
  for (double gphi : traj.sup_grad) peak = std::max(peak, gphi);
  if (sup_grad0 == 0.0 && peak == 0.0) return 0.0;
  return peak / ((2.0 / eps0) * sup_grad0);
}

double time_derivative_monotone(const TrajectoryReport& traj, double t1, double t2) {
  const std::size_t k1 = traj.index_at(t1);
  const double eps1 = traj.margin[k1];
  if (!(eps1 > 0.0)) throw DomainError("time_derivative_monotone: nonpositive margin at t1");
  // The anchor value is the first backward difference inside the window.
  const double base = traj.sup_dtd[k1 + 1 < traj.size() ? k1 + 1 : k1];
  if (base == 0.0) return 0.0;
  const double bound = base / eps1;
  double worst = 0.0;
  for (std::size_t k = k1 + 1; k < traj.size() && traj.time[k] <= t2 + 1e-12; ++k) {
    worst = std::max(worst, traj.sup_dtd[k] / bound);
  }
  return worst;
}

double energy(const DirectorField& d, const MagneticField& h) {
  const Grid& g = *d.grid;
  double acc = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int node = g.index(i, j);
      const double* dn = d.node(node);
      const double* hn = h.node(node);
      const double hd = dn[0] * hn[0] + dn[1] * hn[1] + dn[2] * hn[2];
      acc -= hd * hd;
    }
  }
  // Gradient square by the same central stencil the steppers use.
  const double inv2dx = 0.5 / g.dx;
  const double inv2dy = g.dim == 2 ? 0.5 / g.dy : 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int il = g.index(i > 0 ? i - 1 : 0, j);
      const int ir = g.index(i < g.nx - 1 ? i + 1 : g.nx - 1, j);
      const double* ul = d.node(il);
      const double* ur = d.node(ir);
      double q = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double gx = (ur[c] - ul[c]) * inv2dx;
        q += gx * gx;
      }
      if (g.dim == 2) {
        const int jd = g.index(i, j > 0 ? j - 1 : 0);
        const int ju = g.index(i, j < g.ny - 1 ? j + 1 : g.ny - 1);
        const double* ud = d.node(jd);
        const double* uu = d.node(ju);
        for (int c = 0; c < 3; ++c) {
          const double gy = (uu[c] - ud[c]) * inv2dy;
          q += gy * gy;
        }
      }
      acc += q;
    }
  }
  return 0.5 * acc * g.cell_volume();
}

double bernstein_quotient(const DirectorField& d, Vec3 e, double eps0) {
  if (!(eps0 > 0.0)) throw DomainError("bernstein_quotient: margin must be positive");
  const double delta0 = 0.5 * eps0;
  const Grid& g = *d.grid;
  const double inv2dx = 0.5 / g.dx;
  const double inv2dy = g.dim == 2 ? 0.5 / g.dy : 0.0;
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int node = g.index(i, j);
      const double* dn = d.node(node);
      const double mu = dn[0] * e.x + dn[1] * e.y + dn[2] * e.z;
      const double f = mu - delta0;
      if (!(f > 0.0)) continue;  // outside the quotient's validity region
      const double* ul = d.node(g.index(i > 0 ? i - 1 : 0, j));
      const double* ur = d.node(g.index(i < g.nx - 1 ? i + 1 : g.nx - 1, j));
      double q = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double gx = (ur[c] - ul[c]) * inv2dx;
        q += gx * gx;
      }
      if (g.dim == 2) {
        const double* ud = d.node(g.index(i, j > 0 ? j - 1 : 0));
        const double* uu = d.node(g.index(i, j < g.ny - 1 ? j + 1 : g.ny - 1));
        for (int c = 0; c < 3; ++c) {
          const double gy = (uu[c] - ud[c]) * inv2dy;
          q += gy * gy;
        }
      }
      worst = std::max(worst, 0.5 * q / (f * f));
    }
  }
  return worst;
}

std::pair<double, double> decay_check(const TrajectoryReport& traj, const Schedule& s) {
  const double measured = 1.0 - traj.margin[traj.index_at(3.0 * s.T0)];
  const double eps_hold = traj.margin[traj.index_at(2.0 * s.T0)];
  const double bound = std::exp(-s.Lambda * s.Lambda * eps_hold * s.T0);
  return {measured, bound};
}

std::string report_csv(const TrajectoryReport& traj, const std::string& config_hash,
                       std::uint64_t seed, const std::string& version) {
  std::string out;
  out += "# version: " + std::string(version) + "\n";
  out += "# config: " + config_hash + "\n";
  char buf[512];
  std::snprintf(buf, sizeof(buf), "# seed: %llu\n", static_cast<unsigned long long>(seed));
  out += buf;
  out += "step,time,lambda,norm_dev,margin,sup_grad,sup_dtd,energy,chart_sup,bernstein\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", k,
                  traj.time[k], traj.lambda[k], traj.norm_dev[k], traj.margin[k],
                  traj.sup_grad[k], traj.sup_dtd[k], traj.energy[k], traj.chart_sup[k],
                  traj.bernstein[k]);
    out += buf;
  }
  return out;
}

}  // namespace hmflow
