#include "hmflow/stage_control.hpp"

#include <cmath>
#include <string>

#include "hmflow/errors.hpp"
#include "hmflow/geometry.hpp"

namespace hmflow {

namespace {

inline double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}

}  // namespace

double lambda_profile(double t, const Schedule& s) {
  const double t0 = s.T0;
  if (t <= t0) return 0.0;
  if (t < 2.0 * t0) return s.Lambda * smoothstep((t - t0) / t0);
  if (t <= 3.0 * t0) return s.Lambda;
  if (t < 4.0 * t0) return s.Lambda * smoothstep((4.0 * t0 - t) / t0);
  return 0.0;
}

double required_lambda(double eps0, double T0, double eps4) {
  if (!(eps0 > 0.0) || !(eps0 <= 1.0)) {
    throw DomainError("required_lambda: margin must lie in (0,1], got " + std::to_string(eps0));
  }
  if (!(T0 > 0.0)) throw DomainError("required_lambda: stage length must be positive");
  if (!(eps4 > 0.0) || !(eps4 < 1.0)) {
    throw DomainError("required_lambda: decay target must lie in (0,1), got " +
                      std::to_string(eps4));
  }
  return std::sqrt(std::log(1.0 / eps4) / (eps0 * T0));
}

std::pair<Vec3, Vec3> waypoints(Vec3 e, Vec3 p) {
  const double c = dot(e, p);
  if (c <= -1.0 + 1e-9) {
    throw AntipodalError("waypoints: start and target are antipodal, trisection undefined");
  }
  if (c >= 1.0) return {e, e};  // zero angle
  const double theta = std::acos(c);
  const double st = std::sin(theta);
  // Spherical linear interpolation along the geodesic from e to p.
  auto slerp = [&](double f) -> Vec3 {
    const double a = std::sin((1.0 - f) * theta) / st;
    const double b = std::sin(f * theta) / st;
    return normalized(a * e + b * p);
  };
  return {slerp(1.0 / 3.0), slerp(2.0 / 3.0)};
}

Schedule build_leg_schedule(Vec3 start, Vec3 target, double legT, double eps0, double eps4) {
  if (!(legT > 0.0)) throw DomainError("build_leg_schedule: leg duration must be positive");
  Schedule s;
  s.T0 = legT / 6.0;
  s.Lambda = required_lambda(eps0, s.T0, eps4);
  s.start = start;
  s.target = target;
  s.chart_rotation = rotation_between(target, {0.0, 0.0, 1.0});
  return s;
}

}  // namespace hmflow
