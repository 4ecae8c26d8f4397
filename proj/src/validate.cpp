#include "plume/validate.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "plume/errors.hpp"
#include "plume/field.hpp"
#include "plume/vessel.hpp"

namespace plume {

namespace {

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  double operator()(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

PropertyResult pde_residual(Uniform& rnd) {
  double worst = 0.0;
  const double h = 1e-3;
  // Ages start at 1 so the fixed step resolves the puff in space and time.
  for (int n = 0; n < 1000; ++n) {
    const GaussianPuff puff{0.0, Vec2(rnd(-1, 1), rnd(-1, 1)), rnd(1, 10), rnd(0.5, 2)};
    const FlowField flow = FlowField::uniform(Vec2(rnd(-1, 1), rnd(-1, 1)));
    const double t = rnd(1, 10);
    const double s = std::sqrt(2 * puff.k * t);
    const Vec2 x = puff_center(puff, flow, t) + Vec2(rnd(-2, 2), rnd(-2, 2)) * s;
    auto c = [&](const Vec2& p, double tt) { return puff_concentration(puff, flow, p, tt); };
    const Vec2 ex(h, 0), ey(0, h);
    const double dcdt = (c(x, t + h) - c(x, t - h)) / (2 * h);
    const Vec2 grad((c(x + ex, t) - c(x - ex, t)) / (2 * h), (c(x + ey, t) - c(x - ey, t)) / (2 * h));
    const double lap = (c(x + ex, t) + c(x - ex, t) + c(x + ey, t) + c(x - ey, t) - 4 * c(x, t)) / (h * h);
    const double residual = dcdt + flow.at(t).dot(grad) - puff.k * lap;
    // Each term scales like peak / age.
    worst = std::max(worst, std::abs(residual) * t / puff_peak(puff, t));
  }
  return {"puff PDE residual", worst <= 1e-4, "max normalized residual " + num(worst)};
}

PropertyResult puff_derivatives(Uniform& rnd) {
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const GaussianPuff puff{0.0, Vec2::Zero(), rnd(1, 10), rnd(0.5, 2)};
    const FlowField flow = FlowField::uniform(Vec2(rnd(-1, 1), rnd(-1, 1)));
    const double t = rnd(0.1, 10);
    const double s = std::sqrt(2 * puff.k * t);
    const Vec2 x = puff_center(puff, flow, t) + Vec2(rnd(-2, 2), rnd(-2, 2)) * s;
    const double peak = puff_peak(puff, t);
    const double hg = 1e-4 * s;
    const double hl = 1e-3 * s;
    auto c = [&](const Vec2& p) { return puff_concentration(puff, flow, p, t); };
    const Vec2 ex(hg, 0), ey(0, hg);
    const Vec2 fd((c(x + ex) - c(x - ex)) / (2 * hg), (c(x + ey) - c(x - ey)) / (2 * hg));
    const Vec2 lx(hl, 0), ly(0, hl);
    const double fdl = (c(x + lx) + c(x - lx) + c(x + ly) + c(x - ly) - 4 * c(x)) / (hl * hl);
    const FieldSample a = puff_eval(puff, flow, x, t);
    worst = std::max(worst, (a.grad - fd).norm() / (peak / s));
    worst = std::max(worst, std::abs(a.laplacian - fdl) / (peak / (s * s)));
  }
  return {"puff analytic derivatives", worst <= 1e-6, "max scaled error " + num(worst)};
}

PropertyResult grid_vs_puff() {
  const double k = 1.0;
  const FlowField flow = FlowField::uniform(Vec2(0.5, 0.25));
  const GaussianPuff puff{-1.0, Vec2(-0.25, -0.125), 4 * std::numbers::pi, k};
  GridField grid(Vec2(-8, -8), 0.08, 200, 200, k, flow, Boundary::kOutflow);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      grid.at(i, j) = puff_concentration(puff, flow, grid.cell_center(i, j), 0.0);
    }
  }
  grid.advance_to(0.5, grid.max_stable_dt());
  double worst = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      worst = std::max(worst, std::abs(grid.at(i, j) -
                                        puff_concentration(puff, flow, grid.cell_center(i, j), 0.5)));
    }
  }
  const double rel = worst / puff_peak(puff, 0.5);
  return {"grid solver vs analytic puff", rel <= 0.02, "max error " + num(100 * rel) + "% of peak"};
}

PropertyResult grid_conservation() {
  GridField grid(Vec2::Zero(), 0.5, 40, 30, 0.3, FlowField::uniform(Vec2(0.7, -0.4)),
                 Boundary::kPeriodic);
  Uniform rnd(7);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) grid.at(i, j) = rnd(0, 10);
  }
  double worst = 0.0;
  bool positive = true;
  for (int n = 0; n < 100; ++n) {
    const double before = grid.mass();
    grid.step(grid.max_stable_dt());
    worst = std::max(worst, std::abs(grid.mass() - before) / before);
    for (double c : grid.values()) positive = positive && c >= 0.0;
  }
  return {"grid mass conservation and positivity", worst <= 1e-10 && positive,
          "max relative drift per step " + num(worst)};
}

SensorSample sample_field(const SensorRig& rig, const VesselState& pose,
                          const std::function<double(const Vec2&)>& f) {
  SensorSample s;
  s.positions = world_positions(rig, pose);
  for (int i = 0; i < kSensorCount; ++i) s.readings[i] = f(s.positions[i]);
  return s;
}

PropertyResult affine_exactness(const SensorRig& rig, Uniform& rnd) {
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const Vec2 g(rnd(-5, 5), rnd(-5, 5));
    const double c0 = rnd(-10, 10);
    const VesselState pose{Vec2(rnd(-50, 50), rnd(-50, 50)), rnd(-3, 3)};
    const auto est = estimate(sample_field(rig, pose, [&](const Vec2& p) { return c0 + g.dot(p); }));
    worst = std::max(worst, (est.grad - g).norm() / std::max(1.0, g.norm()));
  }
  // The minimum-norm solution only returns the pure affine gradient when the
  // linear and quadratic Taylor columns are orthogonal, as on symmetric rigs.
  if (!rig.point_symmetric(1e-12)) {
    return {"estimator affine exactness", true,
            "not applicable: rig is not point-symmetric (max relative error " + num(worst) + ")"};
  }
  return {"estimator affine exactness", worst <= 1e-9, "max relative error " + num(worst)};
}

PropertyResult mean_and_zero_sum(const SensorRig& rig, Uniform& rnd) {
  bool ok = true;
  for (int n = 0; n < 200; ++n) {
    SensorSample s;
    s.positions = world_positions(rig, {Vec2(rnd(-5, 5), rnd(-5, 5)), rnd(-3, 3)});
    for (auto& r : s.readings) r = rnd(0, 100);
    const auto est = estimate(s);
    const double mean = 0.25 * (s.readings[0] + s.readings[1] + s.readings[2] + s.readings[3]);
    double sum = 0.0;
    for (double r : s.readings) sum += r - est.c_hat;
    ok = ok && est.c_hat == mean && std::abs(sum) <= 1e-12 * std::max(1.0, mean);
  }
  return {"estimator mean identity and zero-sum residuals", ok, ok ? "exact" : "violated"};
}

PropertyResult trace_blindness(const SensorRig& rig, Uniform& rnd) {
  if (!rig.point_symmetric(1e-12)) {
    return {"estimator trace blindness", true, "not applicable: rig is not point-symmetric"};
  }
  double worst = 0.0;
  for (int n = 0; n < 500; ++n) {
    SensorSample s;
    s.positions = world_positions(rig, {Vec2(rnd(-5, 5), rnd(-5, 5)), rnd(-3, 3)});
    for (auto& r : s.readings) r = rnd(0, 100);
    worst = std::max(worst, std::abs(estimate(s).laplacian));
  }
  return {"estimator trace blindness", worst <= 1e-9, "max |laplacian| " + num(worst)};
}

PropertyResult quadratic_gradient(const SensorRig& rig, Uniform& rnd) {
  if (!rig.point_symmetric(1e-12)) {
    return {"estimator quadratic gradient", true, "not applicable: rig is not point-symmetric"};
  }
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const double a = rnd(-2, 2), b = rnd(-2, 2), c = rnd(-2, 2), d = rnd(-2, 2), e = rnd(-2, 2);
    auto f = [&](const Vec2& p) {
      return a * p.x() * p.x() + b * p.x() * p.y() + c * p.y() * p.y() + d * p.x() + e * p.y();
    };
    const VesselState pose{Vec2(rnd(-5, 5), rnd(-5, 5)), rnd(-3, 3)};
    const Vec2 x = pose.position;
    const Vec2 truth(2 * a * x.x() + b * x.y() + d, b * x.x() + 2 * c * x.y() + e);
    const auto est = estimate(sample_field(rig, pose, f));
    worst = std::max(worst, (est.grad - truth).norm() / std::max(1.0, truth.norm()));
  }
  return {"estimator quadratic gradient", worst <= 1e-9, "max relative error " + num(worst)};
}

PropertyResult pseudoinverse_agreement(const SensorRig& rig, Uniform& rnd) {
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    SensorSample s;
    s.positions = world_positions(rig, {Vec2(rnd(-5, 5), rnd(-5, 5)), rnd(-3, 3)});
    for (auto& r : s.readings) r = rnd(0, 100);
    const auto est = estimate(s);
    const Eigen::Matrix<double, 4, 6> b = taylor_matrix(s.positions);
    Eigen::Vector4d y;
    for (int i = 0; i < kSensorCount; ++i) y(i) = s.readings[i] - est.c_hat;
    const Eigen::Matrix<double, 6, 1> gamma =
        b.transpose() * (b * b.transpose()).inverse() * y;
    worst = std::max(worst, (gamma.head<2>() - est.grad).norm());
    worst = std::max(worst, std::abs(gamma(2) + gamma(5) - est.laplacian));
  }
  return {"pseudoinverse matches explicit formula", worst <= 1e-10, "max difference " + num(worst)};
}

PropertyResult degenerate_stencil() {
  SensorSample s;
  s.positions = {Vec2(-1.5, 0), Vec2(-0.5, 0), Vec2(0.5, 0), Vec2(1.5, 0)};
  s.readings = {1, 2, 3, 4};
  try {
    (void)estimate(s);
  } catch (const DegenerateStencilError&) {
    return {"degenerate stencil detection", true, "collinear rig rejected"};
  }
  return {"degenerate stencil detection", false, "collinear rig accepted"};
}

PropertyResult transform_identity(bool printed, Uniform& rnd) {
  double worst = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const double theta = rnd(-std::numbers::pi, std::numbers::pi);
    const double l0 = rnd(1e-3, 10);
    const Eigen::Matrix2d inv =
        printed ? printed_input_inverse(theta, l0) : input_matrix_inverse(theta, l0);
    const Eigen::Matrix2d err = input_matrix(theta, l0) * inv - Eigen::Matrix2d::Identity();
    worst = std::max(worst, err.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return {"input transform identity", worst < 1e-12, "max ||C C^-1 - I||_inf " + num(worst)};
}

PropertyResult circle_closure() {
  const VesselState s = step(VesselState{}, {1.0, 1.0, false}, 2 * std::numbers::pi);
  const double err = std::max(s.position.norm(), std::abs(normalize_angle(s.heading)));
  return {"RK4 circle closure", err <= 1e-6, "closure error " + num(err)};
}

}  // namespace

std::vector<PropertyResult> run_validation(const ValidationOptions& options) {
  Uniform rnd(options.seed);
  std::vector<PropertyResult> out;
  out.push_back(pde_residual(rnd));
  out.push_back(puff_derivatives(rnd));
  out.push_back(grid_vs_puff());
  out.push_back(grid_conservation());
  out.push_back(affine_exactness(options.rig, rnd));
  out.push_back(mean_and_zero_sum(options.rig, rnd));
  out.push_back(trace_blindness(options.rig, rnd));
  out.push_back(quadratic_gradient(options.rig, rnd));
  out.push_back(pseudoinverse_agreement(options.rig, rnd));
  out.push_back(degenerate_stencil());
  out.push_back(transform_identity(options.printed_inverse, rnd));
  out.push_back(circle_closure());
  return out;
}

}  // namespace plume
