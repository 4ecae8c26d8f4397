#include "plume/guidance.hpp"

#include <cmath>
#include <string>

#include "plume/errors.hpp"

namespace plume {

void GuidanceGains::validate() const {
  if (!(c0 > 0.0)) throw ParameterError("gains.c0 must be positive");
  if (!(k1 > 0.0)) throw ParameterError("gains.k1 must be positive");
  if (!(k2 > 0.0)) throw ParameterError("gains.k2 must be positive");
  if (k < 0.0) throw ParameterError("gains.k must be >= 0");
  if (vd < 0.0) throw ParameterError("gains.vd must be >= 0");
  if (!(grad_floor > 0.0)) throw ParameterError("gains.grad_floor must be positive");
}

std::string_view to_string(SignConvention mode) {
  return mode == SignConvention::kPaperLiteral ? "paper-literal" : "pde-derived";
}

std::string_view to_string(TrackedPoint point) {
  return point == TrackedPoint::kHead ? "head" : "center";
}

std::string_view to_string(GuidanceStatus status) {
  switch (status) {
    case GuidanceStatus::kSeeking: return "seeking";
    case GuidanceStatus::kTracking: return "tracking";
    case GuidanceStatus::kDegenerateGradient: return "degenerate-gradient";
  }
  return "unknown";
}

SignConvention parse_sign_convention(std::string_view s) {
  if (s == "paper-literal") return SignConvention::kPaperLiteral;
  if (s == "pde-derived") return SignConvention::kPdeDerived;
  throw ParameterError("unknown sign convention '" + std::string(s) + "'");
}

TrackedPoint parse_tracked_point(std::string_view s) {
  if (s == "head") return TrackedPoint::kHead;
  if (s == "center") return TrackedPoint::kCenter;
  throw ParameterError("unknown tracked point '" + std::string(s) + "'");
}

Vec2 normal_feedforward(const Vec2& grad, double laplacian, const Vec2& flow,
                        double k, SignConvention mode, double grad_floor) {
  const double n2 = grad.squaredNorm();
  if (!(std::sqrt(n2) >= grad_floor)) {
    throw DegenerateGradientError("gradient norm below floor");
  }
  const double advect = flow.dot(grad);
  const double speed = mode == SignConvention::kPdeDerived
                           ? advect - k * laplacian
                           : -(advect + k * laplacian);
  return speed * grad / n2;
}

namespace {

void check_finite(const Measurement& m) {
  if (!m.x_r.allFinite() || !std::isfinite(m.c_hat) || !m.grad.allFinite() ||
      !std::isfinite(m.laplacian) || !m.flow.allFinite()) {
    throw InputError("non-finite guidance input");
  }
}

}  // namespace

Vec2 observer_rate(const Vec2& x_hat, const GuidanceGains& gains,
                   SignConvention mode, const Measurement& m) {
  const Vec2 ff = normal_feedforward(m.grad, m.laplacian, m.flow, gains.k, mode,
                                     gains.grad_floor);
  const Vec2 tangent = rotate_ccw(m.grad);
  const double residual = m.grad.dot(x_hat - m.x_r) + m.c_hat - gains.c0;
  return ff + gains.vd * tangent / tangent.norm() - gains.k1 * residual * m.grad;
}

GuidanceState init(const Vec2& x_r) {
  GuidanceState g;
  g.x_hat = x_r;
  return g;
}

GuidanceState observer_update(const GuidanceState& g, const GuidanceGains& gains,
                              SignConvention mode, const Measurement& m,
                              double dt) {
  if (!(dt > 0.0)) throw InputError("observer step needs dt > 0");
  check_finite(m);
  if (!g.x_hat.allFinite()) throw InputError("non-finite observer state");
  GuidanceState next = g;
  if (m.grad.norm() < gains.grad_floor) {
    next.status = GuidanceStatus::kDegenerateGradient;
    return next;
  }
  next.x_hat = g.x_hat + dt * observer_rate(g.x_hat, gains, mode, m);
  if (next.status == GuidanceStatus::kDegenerateGradient) {
    next.status = GuidanceStatus::kSeeking;
  }
  return next;
}

Vec2 control(const GuidanceState& g, const GuidanceGains& gains,
             SignConvention mode, const Vec2& tracked, const Measurement& m) {
  check_finite(m);
  if (!tracked.allFinite()) throw InputError("non-finite tracked point");
  const Vec2 pull = -gains.k2 * (tracked - g.x_hat);
  if (m.grad.norm() < gains.grad_floor) return pull;
  return observer_rate(g.x_hat, gains, mode, m) + pull;
}

GuidanceState update_status(GuidanceState g, const GuidanceGains& gains,
                            double c_hat, const Vec2& tracked, double dt) {
  if (g.status == GuidanceStatus::kDegenerateGradient) {
    g.settled_time = 0.0;
    return g;
  }
  const bool near = std::abs(c_hat - gains.c0) < kSettleConcentration * gains.c0 &&
                    (tracked - g.x_hat).norm() < kSettleDistance;
  g.settled_time = near ? g.settled_time + dt : 0.0;
  g.status = g.settled_time >= kSettleTime - 1e-9 ? GuidanceStatus::kTracking
                                                  : GuidanceStatus::kSeeking;
  return g;
}

}  // namespace plume
