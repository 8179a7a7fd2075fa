#pragma once

#include "hmflow/smallmat.hpp"

namespace hmflow {

// Inversion is refused within this distance of the excluded point -e3, so an
// accidental chart blowup surfaces as an explicit error instead of overflow.
inline constexpr double kPoleMargin = 1e-6;

// Chart magnitude cap: |v| beyond this signals drift toward the excluded pole.
inline constexpr double kChartCap = 1e6;

// h = 1 + |v|^2, the conformal factor of the chart.
inline double chart_h(Vec2 v) { return 1.0 + v.x * v.x + v.y * v.y; }

// Stereographic parametrization of the sphere from the point -e3:
// v = 0 maps to the north pole (0,0,1); the result always has third
// component strictly greater than -1.
Vec3 stereo_project(Vec2 v);

// Inverse chart. Requires d3 > -1 + margin; throws PoleError otherwise.
Vec2 stereo_invert(Vec3 d, double margin = kPoleMargin);

// Columns of the 3x2 derivative of stereo_project.
struct ChartJacobian {
  Vec3 col1, col2;
};
ChartJacobian stereo_jacobian(Vec2 v);

// Frame rows: the point itself and the two Jacobian columns transposed.
struct ChartFrame {
  Mat3 e;
  double det;
};
ChartFrame frame_matrix(Vec2 v);

// Minimal-angle rotation taking unit vector a to unit vector b.
// Throws AntipodalError when a . b <= -1 + 1e-9 (axis undefined).
Mat3 rotation_between(Vec3 a, Vec3 b);

}  // namespace hmflow
