#include <cmath>

#include "doctest.h"
#include "hmflow/errors.hpp"
#include "hmflow/field_synthesis.hpp"
#include "hmflow/geometry.hpp"
#include "hmflow/rng.hpp"
#include "oracles.hpp"

using namespace hmflow;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Chart field with a few smooth modes, well inside the chart.
ChartField smooth_chart(const GridPtr& g, double amp) {
  ChartField v(g);
  for (int i = 0; i < g->count(); ++i) {
    const double x = g->x(i % g->nx);
    v.node(i)[0] = amp * std::cos(kPi * x / g->lx);
    v.node(i)[1] = amp * 0.5 * std::cos(2.0 * kPi * x / g->lx);
  }
  return v;
}
}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("zero control reproduces the chart point") {
  Rng rng(21);
  for (int s = 0; s < 500; ++s) {
    const Vec2 v{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const Vec3 h = synthesize_node(v, {0.0, 0.0});
    const Vec3 d = stereo_project(v);
    CHECK(norm(h - d) <= 1e-12 * (1.0 + chart_h(v)));
  }
}

TEST_CASE("matrix satisfies the defining algebraic relations") {
  Rng rng(22);
  for (int s = 0; s < 500; ++s) {
    const Vec2 v{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const double h = chart_h(v);
    const Mat3 a = build_synthesis_matrix(v);
    // Symmetry.
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(a.m[i][j] == a.m[j][i]);
    // Applied to the projected point, the matrix returns exactly the right
    // side of the zero-control system, (0, 0, -h/2).
    const Vec3 img = a * stereo_project(v);
    CHECK(std::abs(img.x) <= 1e-13 * h);
    CHECK(std::abs(img.y) <= 1e-13 * h);
    CHECK(std::abs(img.z + 0.5 * h) <= 1e-13 * h);
    // Determinant against the permutation expansion and the closed form.
    const double d_oracle = oracles::det3_permutation(a);
    CHECK(std::abs(det(a) - d_oracle) <= 1e-12 * std::abs(d_oracle));
    CHECK(std::abs(det(a) + h * h * h / 8.0) <= 1e-11 * h * h * h / 8.0);
  }
}

TEST_CASE("spectrum is {-h/2, h/2, h/2}") {
  Rng rng(23);
  for (int s = 0; s < 200; ++s) {
    const Vec2 v{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const double h = chart_h(v);
    const auto ev = oracles::jacobi_eigenvalues(build_synthesis_matrix(v));
    CHECK(std::abs(ev[0] + 0.5 * h) <= 1e-10 * h);
    CHECK(std::abs(ev[1] - 0.5 * h) <= 1e-10 * h);
    CHECK(std::abs(ev[2] - 0.5 * h) <= 1e-10 * h);
  }
}

TEST_CASE("synthesized node solves the prescription") {
  Rng rng(24);
  for (int s = 0; s < 500; ++s) {
    const Vec2 v{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const Vec2 f{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const Vec3 h = synthesize_node(v, f);
    // Residual through the Jacobian route, independent of the matrix.
    CHECK(synthesis_residual_node(v, f, h, true) <= 1e-11 * (1.0 + norm(h)));
    // The adjugate solve must agree with dense elimination.
    const Mat3 a = build_synthesis_matrix(v);
    const auto x = oracles::dense_solve(
        {{a.m[0][0], a.m[0][1], a.m[0][2]},
         {a.m[1][0], a.m[1][1], a.m[1][2]},
         {a.m[2][0], a.m[2][1], a.m[2][2]}},
        {f.x, f.y, -0.5 * chart_h(v)});
    CHECK(std::abs(h.x - x[0]) <= 1e-10 * (1.0 + std::abs(x[0])));
    CHECK(std::abs(h.y - x[1]) <= 1e-10 * (1.0 + std::abs(x[1])));
    CHECK(std::abs(h.z - x[2]) <= 1e-10 * (1.0 + std::abs(x[2])));
  }
}

TEST_CASE("field synthesis residual and exact support") {
  const GridPtr g = make_grid_1d(65);
  const ChartField v = smooth_chart(g, 0.8);
  ControlDensity f(g);
  Rng rng(25);
  for (int i = 0; i < g->count(); ++i) {
    if (!g->in_omega(i)) continue;
    f.node(i)[0] = rng.uniform(-1.0, 1.0);
    f.node(i)[1] = rng.uniform(-1.0, 1.0);
  }
  const MagneticField h = synthesize_field(v, f);
  CHECK(synthesis_residual(v, f, h) <= 1e-10);
  for (int i = 0; i < g->count(); ++i) {
    if (g->in_omega(i)) continue;
    // Bitwise zeros outside the control region, not merely small values.
    CHECK(h.node(i)[0] == 0.0);
    CHECK(h.node(i)[1] == 0.0);
    CHECK(h.node(i)[2] == 0.0);
  }
}

TEST_CASE("synthesis map is locally Lipschitz in chart point and control") {
  Rng rng(26);
  const double delta = 1e-6;
  for (int s = 0; s < 200; ++s) {
    const Vec2 v{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    const Vec2 f{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const Vec3 h0 = synthesize_node(v, f);
    // Control sensitivity: the inverse matrix has norm 2/h <= 2.
    const Vec3 hf = synthesize_node(v, {f.x + delta, f.y});
    CHECK(norm(hf - h0) <= 2.1 * delta);
    // Chart sensitivity stays bounded on a compact set.
    const Vec3 hv = synthesize_node({v.x + delta, v.y}, f);
    CHECK(norm(hv - h0) <= 100.0 * delta);
  }
}

TEST_CASE("uniform field fills every node and rejects negative amplitude") {
  const GridPtr g = make_grid_1d(11);
  const Vec3 axis = normalized({1.0, -2.0, 2.0});
  const MagneticField h = uniform_field(g, 3.5, axis);
  for (int i = 0; i < g->count(); ++i) {
    CHECK(h.node(i)[0] == 3.5 * axis.x);
    CHECK(h.node(i)[1] == 3.5 * axis.y);
    CHECK(h.node(i)[2] == 3.5 * axis.z);
  }
  CHECK_THROWS_AS(uniform_field(g, -1.0, axis), DomainError);
}

}  // TEST_SUITE
