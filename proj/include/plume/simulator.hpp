#pragma once

// Closed-loop run: field -> sensors -> estimator -> observer/controller ->
// actuators -> vessel, one record per control step.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "plume/field.hpp"
#include "plume/guidance.hpp"
#include "plume/scenario.hpp"
#include "plume/sensing.hpp"

namespace plume {

struct LogRecord {
  double t = 0.0;
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  Vec2 head = Vec2::Zero();
  Vec2 x_hat = Vec2::Zero();
  SensorReadings readings{};
  double c_hat = 0.0;
  Vec2 grad = Vec2::Zero();
  double laplacian = 0.0;
  Vec2 u = Vec2::Zero();
  double nu = 0.0;
  double omega = 0.0;
  bool saturated = false;
  GuidanceStatus status = GuidanceStatus::kSeeking;
  std::optional<double> c_true;      // c(z, t) for analytic fields
  std::optional<Vec2> centroid;      // plume centroid, not serialized
};

enum class Termination { kCompleted, kTruncated, kAborted };

struct RunLog {
  std::vector<LogRecord> records;
  Termination termination = Termination::kCompleted;
  std::string message;
  std::uint64_t seed = 0;
};

RunLog run(const Scenario& scenario);

struct RunMetrics {
  double rms_concentration_error = 0.0;  // over the final half
  double patrol_speed_mean = 0.0;        // over the final half
  double patrol_speed_std = 0.0;
  int winding_sign = 0;
  double winding_turns = 0.0;            // signed revolutions about the centroid
  int winding_reversals = 0;             // steps against the net direction after convergence
  std::optional<double> level_set_error; // analytic single-blob fields only
  double saturation_fraction = 0.0;
  std::optional<double> time_to_tracking;
  std::size_t records = 0;
  bool truncated = false;
  std::uint64_t seed = 0;
};

RunMetrics metrics(const RunLog& log, const Scenario& scenario);

// Radius of the c0 level set of a single puff, or none when the peak is
// below c0.
std::optional<double> level_set_radius(const GaussianPuff& puff, double c0, double t);
std::optional<double> level_set_radius(const FrozenGaussian& blob, double c0);

inline constexpr const char* kCsvHeader =
    "t,x,y,theta,zx,zy,xhat,yhat,c1,c2,c3,c4,chat,gx,gy,lap,ux,uy,nu,omega,sat,status,ctrue";

void write_csv(std::ostream& out, const RunLog& log);
// Parses a CSV written by write_csv; throws InputError on malformed input.
RunLog read_csv(std::istream& in);

nlohmann::json to_json(const RunMetrics& m);

}  // namespace plume
