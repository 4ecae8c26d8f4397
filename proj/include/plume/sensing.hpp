#pragma once

// Four point sensors carried by the vessel, their noise model, and the
// least-squares Taylor-stencil estimator of concentration, gradient and
// laplacian at the rig center.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <random>

#include "plume/field.hpp"
#include "plume/vessel.hpp"

namespace plume {

inline constexpr int kSensorCount = 4;

using SensorPositions = std::array<Vec2, kSensorCount>;
using SensorReadings = std::array<double, kSensorCount>;

// Body-frame sensor offsets. The mean offset must be zero so the rig
// center coincides with the vessel position.
struct SensorRig {
  SensorPositions offsets;

  // (d, 0), (-d, 0), (0, d), (0, -d)
  static SensorRig cross(double arm);
  // Zero-mean layout without point symmetry.
  static SensorRig asymmetric();

  void validate() const;
  bool point_symmetric(double tol = 1e-12) const;
};

struct NoiseModel {
  double sigma = 0.0;        // ppb
  double floor = 0.01;       // ppb, readings below are reported as 0
  double range_max = 1e4;    // ppb

  void validate() const;
};

// Seeded generator owned by a single run. Draws are consumed in sensor order.
class NoiseSource {
 public:
  NoiseSource(NoiseModel model, std::uint64_t seed);

  const NoiseModel& model() const { return model_; }
  double gaussian() { return normal_(engine_); }

 private:
  NoiseModel model_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct SensorSample {
  SensorPositions positions;
  SensorReadings readings{};
  double t = 0.0;
};

struct StencilEstimate {
  double c_hat = 0.0;
  Vec2 grad = Vec2::Zero();
  double laplacian = 0.0;
  Eigen::Vector4d hessian = Eigen::Vector4d::Zero();  // [H11, H12, H21, H22]
  double condition = 0.0;                              // cond(B B^T)
};

inline constexpr double kMaxStencilCondition = 1e10;

// x_Si = x_r + R(theta) offset_i
SensorPositions world_positions(const SensorRig& rig, const VesselState& state);

// Applies floor and range clamp to a raw reading.
double condition_reading(double value, const NoiseModel& model);

SensorSample sample(const ConcentrationField& field,
                    const SensorPositions& positions, double t,
                    NoiseSource& noise);

// Rows [dx, dy, 0.5 vec(d d^T)] with d = x_Si - mean(x_Si).
Eigen::Matrix<double, 4, 6> taylor_matrix(const SensorPositions& positions);

// Minimum-norm solution of the underdetermined Taylor system; throws
// DegenerateStencilError when cond(B B^T) exceeds kMaxStencilCondition.
StencilEstimate estimate(const SensorSample& sample);

}  // namespace plume
