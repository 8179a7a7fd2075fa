#include "hmflow/geometry.hpp"

#include <cmath>

#include "hmflow/errors.hpp"

namespace hmflow {

Vec3 stereo_project(Vec2 v) {
  const double h = chart_h(v);
  return {2.0 * v.x / h, 2.0 * v.y / h, (2.0 - h) / h};
}

Vec2 stereo_invert(Vec3 d, double margin) {
  if (d.z <= -1.0 + margin) {
    throw PoleError("stereo_invert: direction within margin of the excluded pole -e3");
  }
  const double w = 1.0 + d.z;
  return {d.x / w, d.y / w};
}

ChartJacobian stereo_jacobian(Vec2 v) {
  const double h = chart_h(v);
  const double h2 = h * h;
  ChartJacobian j;
  j.col1 = {2.0 / h - 4.0 * v.x * v.x / h2, -4.0 * v.x * v.y / h2, -4.0 * v.x / h2};
  j.col2 = {-4.0 * v.x * v.y / h2, 2.0 / h - 4.0 * v.y * v.y / h2, -4.0 * v.y / h2};
  return j;
}

ChartFrame frame_matrix(Vec2 v) {
  const Vec3 p = stereo_project(v);
  const ChartJacobian j = stereo_jacobian(v);
  ChartFrame f;
  f.e.m[0] = {p.x, p.y, p.z};
  f.e.m[1] = {j.col1.x, j.col1.y, j.col1.z};
  f.e.m[2] = {j.col2.x, j.col2.y, j.col2.z};
  f.det = det(f.e);
  return f;
}

Mat3 rotation_between(Vec3 a, Vec3 b) {
  const double c = dot(a, b);
  if (c <= -1.0 + 1e-9) {
    throw AntipodalError("rotation_between: directions are antipodal, axis undefined");
  }
  const Vec3 w = cross(a, b);
  // Rodrigues formula with sin/cos expressed through the cross product;
  // the 1/(1+c) form is stable away from the antipodal case excluded above.
  const double k = 1.0 / (1.0 + c);
  Mat3 r = Mat3::identity();
  const Mat3 wx{{{{0.0, -w.z, w.y}, {w.z, 0.0, -w.x}, {-w.y, w.x, 0.0}}}};
  const Mat3 wx2 = wx * wx;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r.m[i][j] += wx.m[i][j] + k * wx2.m[i][j];
    }
  }
  return r;
}

}  // namespace hmflow
