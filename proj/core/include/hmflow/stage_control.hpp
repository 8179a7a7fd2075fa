#pragma once

#include <array>
#include <utility>

#include "hmflow/smallmat.hpp"

namespace hmflow {

// One steering leg: six stages of equal length T0. Stages 1-5 apply the
// uniform field lambda(t)*target (rest, ramp up, hold, ramp down, rest);
// stage 6 runs the chart-space null control in the frame where the leg
// target is the north pole.
struct Schedule {
  double T0 = 0.0;      // stage length; the leg covers [0, 6*T0]
  double Lambda = 0.0;  // hold amplitude
  Vec3 start{0.0, 0.0, 1.0};
  Vec3 target{0.0, 0.0, 1.0};
  Mat3 chart_rotation = Mat3::identity();  // maps target to (0,0,1)

  std::array<double, 7> boundaries() const {
    return {0.0, T0, 2.0 * T0, 3.0 * T0, 4.0 * T0, 5.0 * T0, 6.0 * T0};
  }
};

// C^1 amplitude profile: 0 on [0,T0], cubic smoothstep up on [T0,2T0],
// Lambda on [2T0,3T0], smoothstep down on [3T0,4T0], 0 from 4T0 on.
double lambda_profile(double t, const Schedule& s);

// Amplitude for which the comparison-principle decay over one hold stage
// equals eps4: Lambda = sqrt(ln(1/eps4) / (eps0 * T0)).
// Requires 0 < eps0 <= 1, T0 > 0, 0 < eps4 < 1.
double required_lambda(double eps0, double T0, double eps4);

// Points trisecting the geodesic from e to p; consecutive inner products all
// equal cos(theta/3). Throws AntipodalError when e . p <= -1 + 1e-9.
std::pair<Vec3, Vec3> waypoints(Vec3 e, Vec3 p);

// Assembles one leg: T0 = legT/6, Lambda from required_lambda, and the
// rotation taking the target to the chart's north pole.
Schedule build_leg_schedule(Vec3 start, Vec3 target, double legT, double eps0, double eps4);

}  // namespace hmflow
