#include "hmflow/field_synthesis.hpp"

#include <cmath>

#include "hmflow/errors.hpp"
#include "hmflow/geometry.hpp"

namespace hmflow {

Mat3 build_synthesis_matrix(Vec2 v) {
  const double v1 = v.x, v2 = v.y;
  Mat3 a;
  a.m[0] = {0.5 * (1.0 + v2 * v2 - v1 * v1), -v1 * v2, -v1};
  a.m[1] = {-v1 * v2, 0.5 * (1.0 + v1 * v1 - v2 * v2), -v2};
  a.m[2] = {-v1, -v2, 0.5 * (-1.0 + v1 * v1 + v2 * v2)};
  return a;
}

Vec3 synthesize_node(Vec2 v, Vec2 f) {
  const Mat3 a = build_synthesis_matrix(v);
  return solve(a, {f.x, f.y, -0.5 * chart_h(v)});
}

MagneticField synthesize_field(const ChartField& v, const ControlDensity& f) {
  MagneticField h(v.grid);
  for (int i = 0; i < v.count(); ++i) {
    if (!v.grid->in_omega(i)) continue;  // exact zeros off omega
    const double* vn = v.node(i);
    const double* fn = f.node(i);
    const Vec3 hi = synthesize_node({vn[0], vn[1]}, {fn[0], fn[1]});
    double* out = h.node(i);
    out[0] = hi.x;
    out[1] = hi.y;
    out[2] = hi.z;
  }
  return h;
}

double synthesis_residual_node(Vec2 v, Vec2 f, Vec3 h, bool in_omega) {
  const double hh = chart_h(v);
  const double hd = dot(stereo_project(v), h);
  const ChartJacobian j = stereo_jacobian(v);
  const double s = 0.25 * hh * hh * hd;
  const double f1 = in_omega ? f.x : 0.0;
  const double f2 = in_omega ? f.y : 0.0;
  return std::max(std::abs(s * dot(j.col1, h) - f1), std::abs(s * dot(j.col2, h) - f2));
}

double synthesis_residual(const ChartField& v, const ControlDensity& f, const MagneticField& h) {
  double worst = 0.0;
  for (int i = 0; i < v.count(); ++i) {
    const double* vn = v.node(i);
    const double* fn = f.node(i);
    const double* hn = h.node(i);
    worst = std::max(worst, synthesis_residual_node({vn[0], vn[1]}, {fn[0], fn[1]},
                                                    {hn[0], hn[1], hn[2]}, v.grid->in_omega(i)));
  }
  return worst;
}

MagneticField uniform_field(const GridPtr& grid, double lambda, Vec3 axis) {
  if (lambda < 0.0) throw DomainError("uniform_field: amplitude must be nonnegative");
  MagneticField h(grid);
  for (int i = 0; i < grid->count(); ++i) {
    double* out = h.node(i);
    out[0] = lambda * axis.x;
    out[1] = lambda * axis.y;
    out[2] = lambda * axis.z;
  }
  return h;
}

}  // namespace hmflow
