#include "plume/vessel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "plume/errors.hpp"

namespace plume {

void VesselParams::validate() const {
  if (!(offset > 0.0)) throw ParameterError("vessel offset l0 must be positive");
  if (!(nu_max > 0.0) || !(omega_max > 0.0)) {
    throw ParameterError("vessel actuator limits must be positive");
  }
}

double normalize_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

Vec2 head_point(const VesselState& state, double offset) {
  return state.position +
         offset * Vec2(std::cos(state.heading), std::sin(state.heading));
}

Eigen::Matrix2d input_matrix(double heading, double offset) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  Eigen::Matrix2d m;
  m << c, -offset * s,
       s, offset * c;
  return m;
}

Eigen::Matrix2d input_matrix_inverse(double heading, double offset) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  Eigen::Matrix2d m;
  m << c, s,
       -s / offset, c / offset;
  return m;
}

Eigen::Matrix2d printed_input_inverse(double heading, double offset) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  Eigen::Matrix2d m;
  m << c, s,
       -s / offset, -c / offset;
  return m;
}

ActuatorCommand to_actuators(const Vec2& u, double heading,
                             const VesselParams& params) {
  if (!u.allFinite() || !std::isfinite(heading)) {
    throw InputError("non-finite planar control");
  }
  params.validate();
  const Vec2 raw = input_matrix_inverse(heading, params.offset) * u;
  ActuatorCommand cmd;
  cmd.nu = std::clamp(raw.x(), -params.nu_max, params.nu_max);
  cmd.omega = std::clamp(raw.y(), -params.omega_max, params.omega_max);
  cmd.saturated = cmd.nu != raw.x() || cmd.omega != raw.y();
  return cmd;
}

VesselState step(const VesselState& state, const ActuatorCommand& cmd,
                 double dt) {
  if (!(dt > 0.0)) throw InputError("vessel step needs dt > 0");
  auto f = [&](const Eigen::Vector3d& s) {
    return Eigen::Vector3d(cmd.nu * std::cos(s.z()), cmd.nu * std::sin(s.z()),
                           cmd.omega);
  };
  const int n = std::max(1, static_cast<int>(std::ceil(dt / kMaxRk4Step - 1e-9)));
  const double h = dt / n;
  Eigen::Vector3d s(state.position.x(), state.position.y(), state.heading);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d k1 = f(s);
    const Eigen::Vector3d k2 = f(s + 0.5 * h * k1);
    const Eigen::Vector3d k3 = f(s + 0.5 * h * k2);
    const Eigen::Vector3d k4 = f(s + h * k3);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {Vec2(s.x(), s.y()), normalize_angle(s.z())};
}

}  // namespace plume
