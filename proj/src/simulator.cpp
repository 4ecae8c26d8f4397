#include "plume/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "plume/errors.hpp"
#include "plume/log.hpp"
#include "plume/vessel.hpp"

namespace plume {

namespace {

Vec2 measured_flow(const Scenario& s, const ConcentrationField& field,
                   const Vec2& x_r, double t, NoiseSource& noise) {
  Vec2 v = flow_at(field_flow(field), x_r, t);
  if (s.flow_noise_sigma > 0.0) {
    const double nx = noise.gaussian();
    const double ny = noise.gaussian();
    v += s.flow_noise_sigma * Vec2(nx, ny);
  }
  return v;
}

}  // namespace

RunLog run(const Scenario& scenario) {
  scenario.validate();
  RunLog log;
  log.seed = scenario.seed;

  ConcentrationField field = scenario.field;
  NoiseSource noise(scenario.noise, scenario.seed);
  VesselState state = scenario.initial;
  GuidanceState guidance = init(state.position);

  const double dt = scenario.dt_control;
  const auto steps = static_cast<long>(std::floor(scenario.duration / dt + 1e-9));
  const auto substeps = std::max(1L, static_cast<long>(std::ceil(dt / scenario.dt_physics - 1e-9)));
  const double dt_sub = dt / static_cast<double>(substeps);
  log.records.reserve(static_cast<std::size_t>(steps + 1));

  for (long n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    if (auto* grid = std::get_if<GridField>(&field)) {
      grid->advance_to(t, scenario.dt_physics);
    }

    const SensorPositions positions = world_positions(scenario.rig, state);
    SensorSample readings;
    try {
      readings = sample(field, positions, t, noise);
    } catch (const DomainError& e) {
      log.termination = Termination::kTruncated;
      log.message = "vessel left the field domain at t=" + std::to_string(t);
      log_info(log.message);
      break;
    }

    StencilEstimate est;
    try {
      est = estimate(readings);
    } catch (const DegenerateStencilError& e) {
      log.termination = Termination::kAborted;
      log.message = std::string("degenerate stencil at t=") + std::to_string(t) + ": " + e.what();
      log_info(log.message);
      break;
    }

    Measurement m;
    m.x_r = 0.25 * (positions[0] + positions[1] + positions[2] + positions[3]);
    m.c_hat = est.c_hat;
    m.grad = est.grad;
    m.laplacian = est.laplacian;
    m.flow = measured_flow(scenario, field, m.x_r, t, noise);

    const Vec2 z = head_point(state, scenario.vessel.offset);
    const Vec2 tracked = scenario.tracked == TrackedPoint::kHead ? z : state.position;

    guidance = observer_update(guidance, scenario.gains, scenario.sign, m, dt);
    const Vec2 u = control(guidance, scenario.gains, scenario.sign, tracked, m);
    if (!u.allFinite() || !guidance.x_hat.allFinite()) {
      log.termination = Termination::kAborted;
      log.message = "observer diverged at t=" + std::to_string(t);
      log_info(log.message);
      break;
    }
    guidance.last_u = u;
    guidance = update_status(guidance, scenario.gains, est.c_hat, tracked, dt);
    const ActuatorCommand cmd = to_actuators(u, state.heading, scenario.vessel);

    LogRecord rec;
    rec.t = t;
    rec.position = state.position;
    rec.heading = state.heading;
    rec.head = z;
    rec.x_hat = guidance.x_hat;
    rec.readings = readings.readings;
    rec.c_hat = est.c_hat;
    rec.grad = est.grad;
    rec.laplacian = est.laplacian;
    rec.u = u;
    rec.nu = cmd.nu;
    rec.omega = cmd.omega;
    rec.saturated = cmd.saturated;
    rec.status = guidance.status;
    if (is_analytic(field)) rec.c_true = evaluate(field, z, t).c;
    rec.centroid = field_centroid(field, t);
    log.records.push_back(rec);

    if (n == steps) break;
    for (long k = 0; k < substeps; ++k) state = step(state, cmd, dt_sub);
  }
  log_debug("run finished with " + std::to_string(log.records.size()) + " records");
  return log;
}

std::optional<double> level_set_radius(const GaussianPuff& puff, double c0, double t) {
  const double tau = t - puff.release_time;
  if (!(tau > 0.0)) throw DegenerateTimeError("level set before puff release");
  const double peak = puff_peak(puff, t);
  if (peak < c0) return std::nullopt;
  return std::sqrt(4.0 * puff.k * tau * std::log(peak / c0));
}

std::optional<double> level_set_radius(const FrozenGaussian& blob, double c0) {
  if (blob.peak < c0) return std::nullopt;
  return blob.sigma * std::sqrt(2.0 * std::log(blob.peak / c0));
}

namespace {

// Center and radius of the c0 level set when the field is a single blob.
std::optional<std::pair<Vec2, double>> level_circle(const ConcentrationField& field,
                                                    double c0, double t) {
  if (const auto* blob = std::get_if<FrozenGaussian>(&field)) {
    const auto r = level_set_radius(*blob, c0);
    if (!r) return std::nullopt;
    return std::make_pair(blob->center_at(t), *r);
  }
  if (const auto* plume = std::get_if<PuffPlume>(&field)) {
    const auto emission = plume->emission();
    if (emission && emission->rate > 0.0) return std::nullopt;
    const auto puffs = plume->released(t);
    if (puffs.size() != 1) return std::nullopt;
    const auto r = level_set_radius(puffs.front(), c0, t);
    if (!r) return std::nullopt;
    return std::make_pair(puff_center(puffs.front(), plume->flow(), t), *r);
  }
  return std::nullopt;
}

double wrap_pi(double a) { return normalize_angle(a); }

}  // namespace

RunMetrics metrics(const RunLog& log, const Scenario& scenario) {
  RunMetrics out;
  out.seed = log.seed;
  out.records = log.records.size();
  out.truncated = log.termination != Termination::kCompleted;
  const auto& recs = log.records;
  if (recs.size() < 2) return out;

  const double c0 = scenario.gains.c0;
  const double half = 0.5 * (recs.front().t + recs.back().t);

  double sq = 0.0;
  std::size_t count = 0;
  std::size_t saturated = 0;
  for (const auto& r : recs) {
    if (r.saturated) ++saturated;
    if (r.status == GuidanceStatus::kTracking && !out.time_to_tracking) {
      out.time_to_tracking = r.t;
    }
    if (r.t >= half) {
      sq += (r.c_hat - c0) * (r.c_hat - c0);
      ++count;
    }
  }
  out.rms_concentration_error = count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  out.saturation_fraction = static_cast<double>(saturated) / static_cast<double>(recs.size());

  std::vector<double> speeds;
  for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
    if (recs[i].t < half) continue;
    const double dt = recs[i + 1].t - recs[i].t;
    speeds.push_back((recs[i + 1].head - recs[i].head).norm() / dt);
  }
  if (!speeds.empty()) {
    double mean = 0.0;
    for (double s : speeds) mean += s;
    mean /= static_cast<double>(speeds.size());
    double var = 0.0;
    for (double s : speeds) var += (s - mean) * (s - mean);
    out.patrol_speed_mean = mean;
    out.patrol_speed_std = std::sqrt(var / static_cast<double>(speeds.size()));
  }

  // Winding of the head-point polyline about the (moving) plume centroid.
  std::optional<Vec2> fallback;
  for (const auto& r : recs) {
    if (r.centroid) fallback = r.centroid;
  }
  const double settle = out.time_to_tracking.value_or(half);
  double total = 0.0;
  std::vector<std::pair<double, double>> increments;
  for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
    const Vec2 c0p = recs[i].centroid.value_or(fallback.value_or(Vec2::Zero()));
    const Vec2 c1p = recs[i + 1].centroid.value_or(fallback.value_or(Vec2::Zero()));
    const Vec2 a = recs[i].head - c0p;
    const Vec2 b = recs[i + 1].head - c1p;
    if (a.norm() == 0.0 || b.norm() == 0.0) continue;
    const double d = wrap_pi(std::atan2(b.y(), b.x()) - std::atan2(a.y(), a.x()));
    total += d;
    increments.emplace_back(recs[i].t, d);
  }
  out.winding_turns = total / (2.0 * std::numbers::pi);
  out.winding_sign = std::abs(total) < 1e-12 ? 0 : (total > 0.0 ? 1 : -1);
  for (const auto& [t, d] : increments) {
    if (t >= settle && out.winding_sign != 0 && d * out.winding_sign < 0.0) {
      ++out.winding_reversals;
    }
  }

  double err = 0.0;
  std::size_t err_count = 0;
  for (const auto& r : recs) {
    if (r.t < half) continue;
    const auto circle = level_circle(scenario.field, c0, r.t);
    if (!circle) continue;
    err += std::abs((r.head - circle->first).norm() - circle->second);
    ++err_count;
  }
  if (err_count) out.level_set_error = err / static_cast<double>(err_count);
  return out;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out << buf;
}

GuidanceStatus parse_status(const std::string& s) {
  if (s == "seeking") return GuidanceStatus::kSeeking;
  if (s == "tracking") return GuidanceStatus::kTracking;
  if (s == "degenerate-gradient") return GuidanceStatus::kDegenerateGradient;
  throw InputError("unknown status '" + s + "'");
}

}  // namespace

void write_csv(std::ostream& out, const RunLog& log) {
  out << kCsvHeader << '\n';
  for (const auto& r : log.records) {
    const double row[] = {r.t,          r.position.x(), r.position.y(), r.heading,
                          r.head.x(),   r.head.y(),     r.x_hat.x(),    r.x_hat.y(),
                          r.readings[0], r.readings[1], r.readings[2],  r.readings[3],
                          r.c_hat,      r.grad.x(),     r.grad.y(),     r.laplacian,
                          r.u.x(),      r.u.y(),        r.nu,           r.omega};
    for (double v : row) {
      put(out, v);
      out << ',';
    }
    out << (r.saturated ? 1 : 0) << ',' << to_string(r.status) << ',';
    if (r.c_true) put(out, *r.c_true);
    out << '\n';
  }
}

RunLog read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty log");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw InputError("unexpected log header");
  RunLog log;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 23) {
      throw InputError("line " + std::to_string(lineno) + ": expected 23 columns");
    }
    std::vector<double> v(20);
    for (int i = 0; i < 20; ++i) {
      char* end = nullptr;
      v[i] = std::strtod(cells[i].c_str(), &end);
      if (cells[i].empty() || *end != '\0') {
        throw InputError("line " + std::to_string(lineno) + ": bad number '" + cells[i] + "'");
      }
    }
    LogRecord r;
    r.t = v[0];
    r.position = Vec2(v[1], v[2]);
    r.heading = v[3];
    r.head = Vec2(v[4], v[5]);
    r.x_hat = Vec2(v[6], v[7]);
    r.readings = {v[8], v[9], v[10], v[11]};
    r.c_hat = v[12];
    r.grad = Vec2(v[13], v[14]);
    r.laplacian = v[15];
    r.u = Vec2(v[16], v[17]);
    r.nu = v[18];
    r.omega = v[19];
    r.saturated = cells[20] == "1";
    r.status = parse_status(cells[21]);
    if (!cells[22].empty()) r.c_true = std::strtod(cells[22].c_str(), nullptr);
    log.records.push_back(r);
  }
  return log;
}

nlohmann::json to_json(const RunMetrics& m) {
  nlohmann::json j;
  j["rms_concentration_error"] = m.rms_concentration_error;
  j["patrol_speed_mean"] = m.patrol_speed_mean;
  j["patrol_speed_std"] = m.patrol_speed_std;
  j["winding_sign"] = m.winding_sign;
  j["winding_turns"] = m.winding_turns;
  j["winding_reversals"] = m.winding_reversals;
  j["level_set_error"] = m.level_set_error ? nlohmann::json(*m.level_set_error) : nlohmann::json();
  j["saturation_fraction"] = m.saturation_fraction;
  j["time_to_tracking"] = m.time_to_tracking ? nlohmann::json(*m.time_to_tracking) : nlohmann::json();
  j["records"] = m.records;
  j["truncated"] = m.truncated;
  j["seed"] = m.seed;
  return j;
}

}  // namespace plume
