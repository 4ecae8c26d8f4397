#include "plume/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "plume/errors.hpp"

namespace plume {

SensorRig SensorRig::cross(double arm) {
  return {{Vec2(arm, 0.0), Vec2(-arm, 0.0), Vec2(0.0, arm), Vec2(0.0, -arm)}};
}

SensorRig SensorRig::asymmetric() {
  return {{Vec2(0.8, 0.1), Vec2(-0.5, 0.4), Vec2(-0.2, -0.7), Vec2(-0.1, 0.2)}};
}

void SensorRig::validate() const {
  Vec2 mean = Vec2::Zero();
  double scale = 0.0;
  for (const auto& o : offsets) {
    if (!o.allFinite()) throw ParameterError("sensor offset is not finite");
    mean += o;
    scale = std::max(scale, o.norm());
  }
  mean /= kSensorCount;
  if (!(scale > 0.0)) throw ParameterError("sensor offsets are all zero");
  if (mean.norm() > 1e-9 * scale) {
    throw ParameterError("sensor offsets must have zero mean");
  }
  // Collinear when every offset is parallel to the first non-zero one.
  Vec2 dir = Vec2::Zero();
  for (const auto& o : offsets) {
    if (o.norm() > 1e-12 * scale) {
      dir = o.normalized();
      break;
    }
  }
  bool collinear = true;
  for (const auto& o : offsets) {
    if (std::abs(dir.x() * o.y() - dir.y() * o.x()) > 1e-9 * scale) collinear = false;
  }
  if (collinear) throw ParameterError("sensor offsets are collinear");
}

bool SensorRig::point_symmetric(double tol) const {
  for (const auto& o : offsets) {
    const bool has_mirror = std::any_of(offsets.begin(), offsets.end(),
                                        [&](const Vec2& p) { return (p + o).norm() <= tol; });
    if (!has_mirror) return false;
  }
  return true;
}

void NoiseModel::validate() const {
  if (sigma < 0.0) throw ParameterError("noise sigma must be >= 0");
  if (floor < 0.0 || !(floor < range_max)) {
    throw ParameterError("noise floor must satisfy 0 <= floor < range_max");
  }
}

NoiseSource::NoiseSource(NoiseModel model, std::uint64_t seed)
    : model_(model), engine_(seed) {
  model_.validate();
}

SensorPositions world_positions(const SensorRig& rig, const VesselState& state) {
  const double c = std::cos(state.heading);
  const double s = std::sin(state.heading);
  SensorPositions out;
  for (int i = 0; i < kSensorCount; ++i) {
    const Vec2& o = rig.offsets[i];
    out[i] = state.position + Vec2(c * o.x() - s * o.y(), s * o.x() + c * o.y());
  }
  return out;
}

double condition_reading(double value, const NoiseModel& model) {
  value = std::clamp(value, 0.0, model.range_max);
  return value < model.floor ? 0.0 : value;
}

SensorSample sample(const ConcentrationField& field,
                    const SensorPositions& positions, double t,
                    NoiseSource& noise) {
  SensorSample out;
  out.positions = positions;
  out.t = t;
  const NoiseModel& model = noise.model();
  for (int i = 0; i < kSensorCount; ++i) {
    double value = evaluate(field, positions[i], t).c;
    if (model.sigma > 0.0) value += model.sigma * noise.gaussian();
    out.readings[i] = condition_reading(value, model);
  }
  return out;
}

Eigen::Matrix<double, 4, 6> taylor_matrix(const SensorPositions& positions) {
  Vec2 center = Vec2::Zero();
  for (const auto& p : positions) center += p;
  center *= 0.25;
  Eigen::Matrix<double, 4, 6> b;
  for (int i = 0; i < kSensorCount; ++i) {
    const Vec2 d = positions[i] - center;
    b(i, 0) = d.x();
    b(i, 1) = d.y();
    b(i, 2) = 0.5 * d.x() * d.x();
    b(i, 3) = 0.5 * d.x() * d.y();
    b(i, 4) = 0.5 * d.y() * d.x();
    b(i, 5) = 0.5 * d.y() * d.y();
  }
  return b;
}

StencilEstimate estimate(const SensorSample& sample) {
  const Eigen::Matrix<double, 4, 6> b = taylor_matrix(sample.positions);

  const Eigen::JacobiSVD<Eigen::Matrix<double, 4, 6>> svd(b);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? (sv(0) / smin) * (sv(0) / smin)
                                 : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxStencilCondition)) {
    throw DegenerateStencilError("sensor stencil is degenerate, cond(BB^T)=" +
                                 std::to_string(cond));
  }

  StencilEstimate est;
  est.condition = cond;
  double sum = 0.0;
  for (double r : sample.readings) sum += r;
  est.c_hat = 0.25 * sum;

  Eigen::Vector4d y;
  for (int i = 0; i < kSensorCount; ++i) y(i) = sample.readings[i] - est.c_hat;

  // Minimum-norm solution through an orthogonal decomposition of B.
  const Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<double, 4, 6>> cod(b);
  const Eigen::Matrix<double, 6, 1> gamma = cod.solve(y);

  est.grad = Vec2(gamma(0), gamma(1));
  est.hessian = gamma.tail<4>();
  est.laplacian = gamma(2) + gamma(5);
  return est;
}

}  // namespace plume
