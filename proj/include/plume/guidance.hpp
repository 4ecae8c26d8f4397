#pragma once

// Level-curve observer and tracking control law.
//
// The observer keeps an estimate x_hat of a point on the c = c0 level
// curve, driven by the normal velocity of the curve, a tangential patrol
// term of speed v_d and a measurement correction weighted by k1. The
// controller steers the head point onto x_hat with gain k2.

#include <Eigen/Core>

#include <string_view>

namespace plume {

using Vec2 = Eigen::Vector2d;

struct GuidanceGains {
  double c0 = 50.0;          // ppb
  double k = 1.2;            // controller diffusion constant, m^2/s
  double k1 = 5.0;           // measurement gain
  double k2 = 11.0;          // tracking gain, 1/s
  double vd = 1.5;           // patrol speed, m/s
  double grad_floor = 0.05;  // ppb/m

  void validate() const;
};

// How the level-curve normal velocity enters the observer.
//   kPaperLiteral: -(v.grad + k lap) grad / |grad|^2
//   kPdeDerived:   +(v.grad - k lap) grad / |grad|^2
enum class SignConvention { kPaperLiteral, kPdeDerived };

// Which vessel point the k2 term drives onto x_hat.
enum class TrackedPoint { kHead, kCenter };

enum class GuidanceStatus { kSeeking, kTracking, kDegenerateGradient };

std::string_view to_string(SignConvention mode);
std::string_view to_string(TrackedPoint point);
std::string_view to_string(GuidanceStatus status);
SignConvention parse_sign_convention(std::string_view s);
TrackedPoint parse_tracked_point(std::string_view s);

struct GuidanceState {
  Vec2 x_hat = Vec2::Zero();
  Vec2 last_u = Vec2::Zero();
  GuidanceStatus status = GuidanceStatus::kSeeking;
  double settled_time = 0.0;  // time the tracking conditions have held
};

// Quantities measured (or estimated) at the vessel for one control step.
struct Measurement {
  Vec2 x_r = Vec2::Zero();
  double c_hat = 0.0;
  Vec2 grad = Vec2::Zero();
  double laplacian = 0.0;
  Vec2 flow = Vec2::Zero();
};

// Counter-clockwise quarter turn [[0, -1], [1, 0]].
inline Vec2 rotate_ccw(const Vec2& g) { return Vec2(-g.y(), g.x()); }

Vec2 normal_feedforward(const Vec2& grad, double laplacian, const Vec2& flow,
                        double k, SignConvention mode, double grad_floor);

// Observer right-hand side at the current estimate. Requires
// |grad| >= grad_floor.
Vec2 observer_rate(const Vec2& x_hat, const GuidanceGains& gains,
                   SignConvention mode, const Measurement& m);

GuidanceState init(const Vec2& x_r);

// One explicit Euler step of the observer. Holds x_hat and flags
// kDegenerateGradient when the gradient is below the floor.
GuidanceState observer_update(const GuidanceState& g, const GuidanceGains& gains,
                              SignConvention mode, const Measurement& m,
                              double dt);

// Planar control for the single-integrator point `tracked`.
Vec2 control(const GuidanceState& g, const GuidanceGains& gains,
             SignConvention mode, const Vec2& tracked, const Measurement& m);

inline constexpr double kSettleTime = 2.0;         // s
inline constexpr double kSettleDistance = 1.0;     // m
inline constexpr double kSettleConcentration = 0.1;  // fraction of c0

// Diagnostic status bookkeeping; never feeds back into the control.
GuidanceState update_status(GuidanceState g, const GuidanceGains& gains,
                            double c_hat, const Vec2& tracked, double dt);

}  // namespace plume
