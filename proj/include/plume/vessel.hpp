#pragma once

// Unicycle kinematics of the surface vessel and the offset-point change of
// coordinates that turns it into a single integrator.

#include <Eigen/Core>

namespace plume {

using Vec2 = Eigen::Vector2d;

struct VesselState {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;  // rad, in (-pi, pi]
};

struct VesselParams {
  double offset = 0.5;     // l0, m
  double nu_max = 2.0;     // m/s
  double omega_max = 1.5;  // rad/s

  void validate() const;
};

struct ActuatorCommand {
  double nu = 0.0;
  double omega = 0.0;
  bool saturated = false;
};

// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

// z = x_r + l0 (cos theta, sin theta)
Vec2 head_point(const VesselState& state, double offset);

// Maps (nu, omega) to the head-point velocity.
Eigen::Matrix2d input_matrix(double heading, double offset);
Eigen::Matrix2d input_matrix_inverse(double heading, double offset);

// Variant with -c/l0 in the lower right entry. Kept so the validation
// suite can show it is not an inverse.
Eigen::Matrix2d printed_input_inverse(double heading, double offset);

// (nu, omega) = C^{-1} u, saturated to the vessel limits.
ActuatorCommand to_actuators(const Vec2& u, double heading,
                             const VesselParams& params);

inline constexpr double kMaxRk4Step = 0.01;  // s

// RK4 integration with (nu, omega) held over dt, in internal steps no
// longer than kMaxRk4Step.
VesselState step(const VesselState& state, const ActuatorCommand& cmd,
                 double dt);

}  // namespace plume
