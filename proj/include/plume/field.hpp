#pragma once

// Concentration and flow fields for the advection-diffusion plume model
//
//   dc/dt + v^T grad(c) = k lap(c)
//
// Two families are provided: closed-form fields built from Gaussian puffs
// (exact solutions under spatially uniform flow) and an explicit
// finite-difference grid solver.

#include <Eigen/Core>

#include <optional>
#include <variant>
#include <vector>

namespace plume {

using Vec2 = Eigen::Vector2d;

// Value, gradient and laplacian of a concentration field at one point.
struct FieldSample {
  double c = 0.0;
  Vec2 grad = Vec2::Zero();
  double laplacian = 0.0;
};

// Spatially uniform flow, either constant or piecewise constant in time.
// Segment i covers [boundaries[i-1], boundaries[i]); the first segment
// extends to -inf and the last to +inf.
class FlowField {
 public:
  FlowField() = default;

  static FlowField uniform(const Vec2& velocity);
  static FlowField piecewise(std::vector<Vec2> velocities,
                             std::vector<double> boundaries);

  bool is_uniform() const { return velocities_.size() == 1; }
  const std::vector<Vec2>& velocities() const { return velocities_; }
  const std::vector<double>& boundaries() const { return boundaries_; }

  std::size_t segment(double t) const;
  Vec2 at(double t) const { return velocities_[segment(t)]; }

  // True when a single segment covers the half-open lifetime (t0, t].
  bool constant_over(double t0, double t) const;

 private:
  std::vector<Vec2> velocities_{Vec2::Zero()};
  std::vector<double> boundaries_;
};

Vec2 flow_at(const FlowField& flow, const Vec2& x, double t);

// Impulsive point release; diffusion k is shared with the owning plume.
struct GaussianPuff {
  double release_time = 0.0;
  Vec2 release_point = Vec2::Zero();
  double strength = 0.0;  // ppb m^2
  double k = 1.0;         // m^2/s
};

// Advected center x_c(t) = release_point + v (t - t0).
Vec2 puff_center(const GaussianPuff& puff, const FlowField& flow, double t);
double puff_peak(const GaussianPuff& puff, double t);

double puff_concentration(const GaussianPuff& puff, const FlowField& flow,
                          const Vec2& x, double t);
Vec2 puff_gradient(const GaussianPuff& puff, const FlowField& flow,
                   const Vec2& x, double t);
double puff_laplacian(const GaussianPuff& puff, const FlowField& flow,
                      const Vec2& x, double t);
FieldSample puff_eval(const GaussianPuff& puff, const FlowField& flow,
                      const Vec2& x, double t);

// Continuous point source discretized into puffs of strength
// rate * interval, the first released at start_time.
struct Emission {
  Vec2 source = Vec2::Zero();
  double rate = 0.0;  // ppb m^2 / s
  double interval = 0.5;
  double start_time = 0.0;
};

// Superposition of explicitly placed puffs and an optional continuous
// emission, all sharing one flow field and diffusion coefficient.
class PuffPlume {
 public:
  static constexpr double kPruneThreshold = 1e-6;  // ppb peak

  PuffPlume(FlowField flow, double k, std::vector<GaussianPuff> puffs = {},
            std::optional<Emission> emission = std::nullopt);

  const FlowField& flow() const { return flow_; }
  double k() const { return k_; }
  const std::vector<GaussianPuff>& puffs() const { return puffs_; }
  const std::optional<Emission>& emission() const { return emission_; }
  double start_time() const;

  // Every puff with release time strictly before t.
  std::vector<GaussianPuff> released(double t) const;

  // Strength-weighted mean of the advected puff centers.
  std::optional<Vec2> centroid(double t) const;

 private:
  FlowField flow_;
  double k_;
  std::vector<GaussianPuff> puffs_;
  std::optional<Emission> emission_;
};

FieldSample plume_eval(const PuffPlume& plume, const Vec2& x, double t);

// Gaussian blob of fixed width translated by a uniform flow. Solves the
// pure-advection equation (k = 0) exactly.
struct FrozenGaussian {
  double peak = 1.0;
  double sigma = 1.0;
  Vec2 center = Vec2::Zero();  // at t = 0
  FlowField flow;

  Vec2 center_at(double t) const;
  FieldSample eval(const Vec2& x, double t) const;
};

enum class Boundary { kOutflow, kPeriodic };

// Cell-centered grid. Cell (i, j) is centered at origin + h (i, j).
class GridField {
 public:
  static constexpr double kSafety = 0.9;

  GridField(const Vec2& origin, double h, int nx, int ny, double k,
            FlowField flow, Boundary boundary, double time = 0.0);

  const Vec2& origin() const { return origin_; }
  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double k() const { return k_; }
  const FlowField& flow() const { return flow_; }
  Boundary boundary() const { return boundary_; }
  double time() const { return time_; }

  double& at(int i, int j) { return values_[index(i, j)]; }
  double at(int i, int j) const { return values_[index(i, j)]; }
  const std::vector<double>& values() const { return values_; }

  Vec2 cell_center(int i, int j) const;
  double mass() const;
  std::optional<Vec2> centroid() const;

  // Largest admissible explicit step for the flow active at time().
  double max_stable_dt() const;

  // Advances in place by one explicit step; throws StepSizeError when dt
  // exceeds max_stable_dt().
  void step(double dt);

  // Advances to t_target with steps no larger than dt_max, subdividing as
  // required by the stability bound.
  void advance_to(double t_target, double dt_max);

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) +
           static_cast<std::size_t>(i);
  }
  int wrap_x(int i) const;
  int wrap_y(int j) const;

  Vec2 origin_;
  double h_;
  int nx_;
  int ny_;
  double k_;
  FlowField flow_;
  Boundary boundary_;
  double time_;
  std::vector<double> values_;
  std::vector<double> scratch_;
};

GridField grid_step(const GridField& grid, double dt);
FieldSample grid_sample(const GridField& grid, const Vec2& x);

using ConcentrationField = std::variant<PuffPlume, FrozenGaussian, GridField>;

// Evaluates any field. Grid fields are sampled at their current time and
// ignore t.
FieldSample evaluate(const ConcentrationField& field, const Vec2& x, double t);
bool is_analytic(const ConcentrationField& field);
std::optional<Vec2> field_centroid(const ConcentrationField& field, double t);
const FlowField& field_flow(const ConcentrationField& field);

}  // namespace plume
