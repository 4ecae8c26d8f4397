#include "plume/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "plume/errors.hpp"

namespace plume {

FlowField FlowField::uniform(const Vec2& velocity) {
  FlowField flow;
  flow.velocities_ = {velocity};
  return flow;
}

FlowField FlowField::piecewise(std::vector<Vec2> velocities,
                               std::vector<double> boundaries) {
  if (velocities.empty() || boundaries.size() + 1 != velocities.size()) {
    throw ParameterError("piecewise flow needs one more velocity than boundaries");
  }
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (!(boundaries[i] > boundaries[i - 1])) {
      throw ParameterError("flow segment boundaries must be strictly increasing");
    }
  }
  FlowField flow;
  flow.velocities_ = std::move(velocities);
  flow.boundaries_ = std::move(boundaries);
  return flow;
}

std::size_t FlowField::segment(double t) const {
  // Half-open segments: a time on a boundary belongs to the later segment.
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
  return static_cast<std::size_t>(it - boundaries_.begin());
}

bool FlowField::constant_over(double t0, double t) const {
  if (is_uniform()) return true;
  // The lifetime is (t0, t]; its flow is that of the segment just after t0.
  auto first = std::upper_bound(boundaries_.begin(), boundaries_.end(), t0);
  return first == boundaries_.end() || *first >= t;
}

Vec2 flow_at(const FlowField& flow, const Vec2& /*x*/, double t) {
  return flow.at(t);
}

namespace {

double check_lifetime(const GaussianPuff& puff, const FlowField& flow,
                      double t) {
  const double tau = t - puff.release_time;
  if (!(tau > 0.0)) {
    throw DegenerateTimeError("puff queried at t=" + std::to_string(t) +
                              " not after its release at " +
                              std::to_string(puff.release_time));
  }
  if (!flow.constant_over(puff.release_time, t)) {
    throw ModelValidityError(
        "puff closed form requires constant flow over its lifetime");
  }
  return tau;
}

}  // namespace

Vec2 puff_center(const GaussianPuff& puff, const FlowField& flow, double t) {
  const double tau = check_lifetime(puff, flow, t);
  // Flow is constant over the lifetime; sample it at release.
  const Vec2 v = flow.at(puff.release_time);
  return puff.release_point + v * tau;
}

double puff_peak(const GaussianPuff& puff, double t) {
  const double tau = t - puff.release_time;
  if (!(tau > 0.0)) throw DegenerateTimeError("puff peak before release");
  return puff.strength / (4.0 * std::numbers::pi * puff.k * tau);
}

FieldSample puff_eval(const GaussianPuff& puff, const FlowField& flow,
                      const Vec2& x, double t) {
  const double tau = check_lifetime(puff, flow, t);
  const Vec2 r = x - (puff.release_point + flow.at(puff.release_time) * tau);
  const double kt = puff.k * tau;
  const double r2 = r.squaredNorm();
  FieldSample s;
  s.c = puff.strength / (4.0 * std::numbers::pi * kt) * std::exp(-r2 / (4.0 * kt));
  s.grad = -s.c * r / (2.0 * kt);
  s.laplacian = s.c * (r2 / (4.0 * kt * kt) - 1.0 / kt);
  return s;
}

double puff_concentration(const GaussianPuff& puff, const FlowField& flow,
                          const Vec2& x, double t) {
  return puff_eval(puff, flow, x, t).c;
}

Vec2 puff_gradient(const GaussianPuff& puff, const FlowField& flow,
                   const Vec2& x, double t) {
  return puff_eval(puff, flow, x, t).grad;
}

double puff_laplacian(const GaussianPuff& puff, const FlowField& flow,
                      const Vec2& x, double t) {
  return puff_eval(puff, flow, x, t).laplacian;
}

PuffPlume::PuffPlume(FlowField flow, double k, std::vector<GaussianPuff> puffs,
                     std::optional<Emission> emission)
    : flow_(std::move(flow)),
      k_(k),
      puffs_(std::move(puffs)),
      emission_(std::move(emission)) {
  if (!(k_ > 0.0)) throw ParameterError("plume diffusion k must be positive");
  for (auto& p : puffs_) {
    if (!(p.strength > 0.0)) throw ParameterError("puff strength must be positive");
    p.k = k_;
  }
  if (emission_) {
    if (emission_->rate < 0.0) throw ParameterError("emission rate must be >= 0");
    if (!(emission_->interval > 0.0)) {
      throw ParameterError("puff interval must be positive");
    }
  }
}

double PuffPlume::start_time() const {
  double t = emission_ ? emission_->start_time
                       : std::numeric_limits<double>::infinity();
  for (const auto& p : puffs_) t = std::min(t, p.release_time);
  return t;
}

std::vector<GaussianPuff> PuffPlume::released(double t) const {
  std::vector<GaussianPuff> out;
  for (const auto& p : puffs_) {
    if (p.release_time < t) out.push_back(p);
  }
  if (emission_ && emission_->rate > 0.0) {
    const double q = emission_->rate * emission_->interval;
    for (long i = 0;; ++i) {
      const double t0 = emission_->start_time + static_cast<double>(i) * emission_->interval;
      if (!(t0 < t)) break;
      out.push_back({t0, emission_->source, q, k_});
    }
  }
  return out;
}

std::optional<Vec2> PuffPlume::centroid(double t) const {
  Vec2 acc = Vec2::Zero();
  double mass = 0.0;
  for (const auto& p : released(t)) {
    acc += p.strength * puff_center(p, flow_, t);
    mass += p.strength;
  }
  if (mass <= 0.0) return std::nullopt;
  return acc / mass;
}

FieldSample plume_eval(const PuffPlume& plume, const Vec2& x, double t) {
  FieldSample total;
  for (const auto& p : plume.released(t)) {
    if (puff_peak(p, t) < PuffPlume::kPruneThreshold) continue;
    const FieldSample s = puff_eval(p, plume.flow(), x, t);
    total.c += s.c;
    total.grad += s.grad;
    total.laplacian += s.laplacian;
  }
  return total;
}

Vec2 FrozenGaussian::center_at(double t) const {
  if (!flow.is_uniform()) {
    throw ModelValidityError("frozen Gaussian requires uniform flow");
  }
  return center + flow.at(t) * t;
}

FieldSample FrozenGaussian::eval(const Vec2& x, double t) const {
  const Vec2 r = x - center_at(t);
  const double s2 = sigma * sigma;
  const double r2 = r.squaredNorm();
  FieldSample s;
  s.c = peak * std::exp(-r2 / (2.0 * s2));
  s.grad = -s.c * r / s2;
  s.laplacian = s.c * (r2 / (s2 * s2) - 2.0 / s2);
  return s;
}

GridField::GridField(const Vec2& origin, double h, int nx, int ny, double k,
                     FlowField flow, Boundary boundary, double time)
    : origin_(origin),
      h_(h),
      nx_(nx),
      ny_(ny),
      k_(k),
      flow_(std::move(flow)),
      boundary_(boundary),
      time_(time) {
  if (nx_ < 3 || ny_ < 3) throw ParameterError("grid needs nx, ny >= 3");
  if (!(h_ > 0.0)) throw ParameterError("grid cell size must be positive");
  if (k_ < 0.0) throw ParameterError("grid diffusion k must be >= 0");
  values_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), 0.0);
}

Vec2 GridField::cell_center(int i, int j) const {
  return origin_ + h_ * Vec2(i, j);
}

double GridField::mass() const {
  double m = 0.0;
  for (double c : values_) m += c;
  return m * h_ * h_;
}

std::optional<Vec2> GridField::centroid() const {
  Vec2 acc = Vec2::Zero();
  double m = 0.0;
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      acc += at(i, j) * cell_center(i, j);
      m += at(i, j);
    }
  }
  if (m <= 0.0) return std::nullopt;
  return acc / m;
}

double GridField::max_stable_dt() const {
  const Vec2 v = flow_.at(time_);
  const double rate = (std::abs(v.x()) + std::abs(v.y())) / h_ + 4.0 * k_ / (h_ * h_);
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  return kSafety / rate;
}

int GridField::wrap_x(int i) const {
  if (boundary_ == Boundary::kPeriodic) return (i + nx_) % nx_;
  return std::clamp(i, 0, nx_ - 1);
}

int GridField::wrap_y(int j) const {
  if (boundary_ == Boundary::kPeriodic) return (j + ny_) % ny_;
  return std::clamp(j, 0, ny_ - 1);
}

void GridField::step(double dt) {
  if (k_ < 0.0) throw ParameterError("grid diffusion k must be >= 0");
  if (!(dt > 0.0)) throw StepSizeError("grid step must be positive");
  const double limit = max_stable_dt();
  if (dt > limit * (1.0 + 1e-12)) {
    throw StepSizeError("grid step " + std::to_string(dt) +
                        " exceeds stability bound " + std::to_string(limit));
  }
  const Vec2 v = flow_.at(time_);
  const double ax = dt * v.x() / h_;
  const double ay = dt * v.y() / h_;
  const double dk = dt * k_ / (h_ * h_);
  scratch_.resize(values_.size());
  for (int j = 0; j < ny_; ++j) {
    const int jm = wrap_y(j - 1);
    const int jp = wrap_y(j + 1);
    for (int i = 0; i < nx_; ++i) {
      const int im = wrap_x(i - 1);
      const int ip = wrap_x(i + 1);
      const double c = at(i, j);
      const double cw = at(im, j);
      const double ce = at(ip, j);
      const double cs = at(i, jm);
      const double cn = at(i, jp);
      // First-order upwind differences.
      const double adv_x = ax >= 0.0 ? ax * (c - cw) : ax * (ce - c);
      const double adv_y = ay >= 0.0 ? ay * (c - cs) : ay * (cn - c);
      const double diff = dk * (ce + cw + cn + cs - 4.0 * c);
      scratch_[index(i, j)] = c - adv_x - adv_y + diff;
    }
  }
  values_.swap(scratch_);
  time_ += dt;
}

void GridField::advance_to(double t_target, double dt_max) {
  while (time_ < t_target) {
    const double remaining = t_target - time_;
    const double bound = std::min(dt_max, max_stable_dt());
    const auto n = std::max(1L, static_cast<long>(std::ceil(remaining / bound - 1e-9)));
    if (n == 1) {
      step(remaining);
      time_ = t_target;
      return;
    }
    step(remaining / static_cast<double>(n));
  }
}

GridField grid_step(const GridField& grid, double dt) {
  GridField next = grid;
  next.step(dt);
  return next;
}

FieldSample grid_sample(const GridField& grid, const Vec2& x) {
  const double fx = (x.x() - grid.origin().x()) / grid.h();
  const double fy = (x.y() - grid.origin().y()) / grid.h();
  const double hi_x = grid.nx() - 2;
  const double hi_y = grid.ny() - 2;
  if (!(fx >= 1.0 && fx <= hi_x && fy >= 1.0 && fy <= hi_y)) {
    throw DomainError("grid sample outside the interior domain");
  }
  const int i0 = std::min(static_cast<int>(std::floor(fx)), grid.nx() - 3);
  const int j0 = std::min(static_cast<int>(std::floor(fy)), grid.ny() - 3);
  const double wx = fx - i0;
  const double wy = fy - j0;
  const double h = grid.h();

  auto node = [&](int i, int j) {
    FieldSample s;
    const double c = grid.at(i, j);
    const double ce = grid.at(i + 1, j);
    const double cw = grid.at(i - 1, j);
    const double cn = grid.at(i, j + 1);
    const double cs = grid.at(i, j - 1);
    s.c = c;
    s.grad = Vec2((ce - cw) / (2.0 * h), (cn - cs) / (2.0 * h));
    s.laplacian = (ce + cw + cn + cs - 4.0 * c) / (h * h);
    return s;
  };

  const FieldSample s00 = node(i0, j0);
  const FieldSample s10 = node(i0 + 1, j0);
  const FieldSample s01 = node(i0, j0 + 1);
  const FieldSample s11 = node(i0 + 1, j0 + 1);
  const double w00 = (1 - wx) * (1 - wy);
  const double w10 = wx * (1 - wy);
  const double w01 = (1 - wx) * wy;
  const double w11 = wx * wy;

  FieldSample out;
  out.c = w00 * s00.c + w10 * s10.c + w01 * s01.c + w11 * s11.c;
  out.grad = w00 * s00.grad + w10 * s10.grad + w01 * s01.grad + w11 * s11.grad;
  out.laplacian = w00 * s00.laplacian + w10 * s10.laplacian +
                  w01 * s01.laplacian + w11 * s11.laplacian;
  return out;
}

FieldSample evaluate(const ConcentrationField& field, const Vec2& x, double t) {
  return std::visit(
      [&](const auto& f) -> FieldSample {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PuffPlume>) {
          return plume_eval(f, x, t);
        } else if constexpr (std::is_same_v<T, FrozenGaussian>) {
          return f.eval(x, t);
        } else {
          return grid_sample(f, x);
        }
      },
      field);
}

bool is_analytic(const ConcentrationField& field) {
  return !std::holds_alternative<GridField>(field);
}

std::optional<Vec2> field_centroid(const ConcentrationField& field, double t) {
  return std::visit(
      [&](const auto& f) -> std::optional<Vec2> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PuffPlume>) {
          return f.centroid(t);
        } else if constexpr (std::is_same_v<T, FrozenGaussian>) {
          return f.center_at(t);
        } else {
          return f.centroid();
        }
      },
      field);
}

const FlowField& field_flow(const ConcentrationField& field) {
  return std::visit([](const auto& f) -> const FlowField& {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, FrozenGaussian>) {
      return f.flow;
    } else {
      return f.flow();
    }
  }, field);
}

}  // namespace plume
