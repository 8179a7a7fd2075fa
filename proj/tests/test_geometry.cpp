#include <cmath>

#include "doctest.h"
#include "hmflow/errors.hpp"
#include "hmflow/geometry.hpp"
#include "hmflow/rng.hpp"
#include "oracles.hpp"

using namespace hmflow;

namespace {
constexpr double kPi = 3.14159265358979323846;

Vec2 random_chart_point(Rng& rng, double max_log10) {
  const double r = std::pow(10.0, rng.uniform(-3.0, max_log10));
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  return {r * std::cos(phi), r * std::sin(phi)};
}
}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("projection lands on the unit sphere away from the excluded pole") {
  Rng rng(11);
  for (int s = 0; s < 1000; ++s) {
    const Vec2 v = random_chart_point(rng, 3.0);
    const Vec3 d = stereo_project(v);
    CHECK(std::abs(norm(d) - 1.0) <= 1e-14);
    CHECK(d.z > -1.0);
  }
  const Vec3 pole = stereo_project({0.0, 0.0});
  CHECK(pole.x == 0.0);
  CHECK(pole.y == 0.0);
  CHECK(pole.z == 1.0);
}

TEST_CASE("chart round trip across magnitudes") {
  Rng rng(12);
  for (int s = 0; s < 2000; ++s) {
    const Vec2 v = random_chart_point(rng, 3.0);
    const Vec2 back = stereo_invert(stereo_project(v));
    CHECK(norm(back - v) <= 1e-8 * (1.0 + norm(v)));
  }
  // And in the other direction, starting from sphere points.
  Rng rng2(13);
  for (int s = 0; s < 500; ++s) {
    Vec3 d = oracles::random_unit(rng2);
    if (d.z <= -0.99) continue;
    const Vec3 again = stereo_project(stereo_invert(d));
    CHECK(norm(again - d) <= 1e-12);
  }
}

TEST_CASE("inversion refuses the excluded pole") {
  // Just inside the margin: refused.
  const double z_in = -1.0 + 0.5 * kPoleMargin;
  const double s_in = std::sqrt(1.0 - z_in * z_in);
  CHECK_THROWS_AS(stereo_invert({s_in, 0.0, z_in}), PoleError);
  // Just outside: accepted, and the round trip still closes.
  const double z_out = -1.0 + 2.0 * kPoleMargin;
  const double s_out = std::sqrt(1.0 - z_out * z_out);
  Vec2 v;
  CHECK_NOTHROW(v = stereo_invert({s_out, 0.0, z_out}));
  CHECK(norm(stereo_project(v) - Vec3{s_out, 0.0, z_out}) <= 1e-9);
}

TEST_CASE("jacobian columns match central finite differences") {
  Rng rng(14);
  for (int s = 0; s < 200; ++s) {
    const Vec2 v{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const ChartJacobian j = stereo_jacobian(v);
    const auto fd = oracles::fd_jacobian([](Vec2 w) { return stereo_project(w); }, v);
    CHECK(norm(j.col1 - fd[0]) <= 1e-7);
    CHECK(norm(j.col2 - fd[1]) <= 1e-7);
  }
}

TEST_CASE("first fundamental form is conformal with factor 4/h^2") {
  Rng rng(15);
  for (int s = 0; s < 500; ++s) {
    const Vec2 v{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
    const ChartJacobian j = stereo_jacobian(v);
    const double g = 4.0 / (chart_h(v) * chart_h(v));
    CHECK(std::abs(dot(j.col1, j.col1) - g) <= 1e-13 * g);
    CHECK(std::abs(dot(j.col2, j.col2) - g) <= 1e-13 * g);
    CHECK(std::abs(dot(j.col1, j.col2)) <= 1e-13 * g);
    // Both columns are tangent to the sphere at the projected point.
    const Vec3 d = stereo_project(v);
    CHECK(std::abs(dot(j.col1, d)) <= 1e-13);
    CHECK(std::abs(dot(j.col2, d)) <= 1e-13);
  }
}

TEST_CASE("frame determinant in closed form") {
  Rng rng(16);
  for (int s = 0; s < 500; ++s) {
    const Vec2 v{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
    const ChartFrame fr = frame_matrix(v);
    const double oracle = oracles::det3_permutation(fr.e);
    const double h = chart_h(v);
    const double closed = 4.0 / (h * h);
    CHECK(std::abs(fr.det - oracle) <= 1e-12 * std::abs(oracle));
    CHECK(std::abs(fr.det * fr.det - closed * closed) <= 1e-10 * closed * closed);
  }
}

TEST_CASE("rotation between directions") {
  Rng rng(17);
  for (int s = 0; s < 300; ++s) {
    const Vec3 a = oracles::random_unit(rng);
    const Vec3 b = oracles::random_unit(rng);
    if (dot(a, b) < -0.999) continue;
    const Mat3 r = rotation_between(a, b);
    CHECK(norm(r * a - b) <= 1e-13);
    // Orthogonality and orientation.  Rounding in the 1/(1 + a.b) terms
    // grows as the pair approaches antipodal, so scale the tolerance.
    const double tol = 1e-13 * (1.0 + 0.01 / (1.0 + dot(a, b)));
    const Mat3 rtr = r.transposed() * r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(rtr.m[i][j] - (i == j ? 1.0 : 0.0)) <= tol);
    CHECK(std::abs(oracles::det3_permutation(r) - 1.0) <= 1e-12 + tol);
    // Against the axis-angle formula on an unrelated test vector.
    const Vec3 ax = cross(a, b);
    if (norm(ax) > 1e-8) {
      const double theta = std::acos(std::max(-1.0, std::min(1.0, dot(a, b))));
      const Vec3 w = oracles::random_unit(rng);
      CHECK(norm(r * w - oracles::rotate_axis_angle(normalized(ax), theta, w)) <= 1e-12);
    }
  }
  // Identical inputs give the identity.
  const Mat3 id = rotation_between({0.0, 0.0, 1.0}, {0.0, 0.0, 1.0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(id.m[i][j] - (i == j ? 1.0 : 0.0)) <= 1e-14);
}

TEST_CASE("rotation rejects antipodal pairs") {
  CHECK_THROWS_AS(rotation_between({0.0, 0.0, 1.0}, {0.0, 0.0, -1.0}), AntipodalError);
  const Vec3 a = normalized({1.0, 2.0, -0.5});
  CHECK_THROWS_AS(rotation_between(a, -1.0 * a), AntipodalError);
}

}  // TEST_SUITE
