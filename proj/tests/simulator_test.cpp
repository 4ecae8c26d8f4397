#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "plume/scenario.hpp"
#include "plume/simulator.hpp"

using namespace plume;

namespace {

const double kPi = std::numbers::pi;

Scenario bundled(const std::string& name) {
  return load_scenario(std::string(PLUME_SOURCE_DIR) + "/scenarios/" + name + ".json");
}

std::string csv_of(const RunLog& log) {
  std::ostringstream out;
  write_csv(out, log);
  return out.str();
}

RunLog circle_log(double omega) {
  RunLog log;
  const double dt = 0.01;
  for (int n = 0; n <= static_cast<int>(std::round(2 * kPi / dt)); ++n) {
    LogRecord r;
    r.t = n * dt;
    r.head = Vec2(std::cos(omega * r.t), std::sin(omega * r.t));
    log.records.push_back(r);
  }
  return log;
}

}  // namespace

TEST_CASE("record count follows duration and control period") {
  Scenario s = bundled("advection");
  s.duration = 60.0;
  s.dt_control = 0.05;
  CHECK(run(s).records.size() == 1201);
  s.duration = 1.0;
  s.dt_control = 0.3;
  CHECK(run(s).records.size() == 4);
}

TEST_CASE("runs are deterministic") {
  Scenario s = bundled("case1");
  s.noise.sigma = 2.0;
  s.seed = 42;
  const std::string a = csv_of(run(s));
  CHECK(a == csv_of(run(s)));
  s.seed = 43;
  CHECK(a != csv_of(run(s)));
}

TEST_CASE("case1 converges to the level curve") {
  const Scenario s = bundled("case1");
  const RunLog log = run(s);
  CHECK(log.termination == Termination::kCompleted);
  const RunMetrics m = metrics(log, s);
  REQUIRE(m.time_to_tracking.has_value());
  CHECK(*m.time_to_tracking < 20.0);
  CHECK(m.rms_concentration_error < 0.2 * s.gains.c0);
  CHECK(m.patrol_speed_mean == doctest::Approx(s.gains.vd).epsilon(0.15));
  CHECK(m.winding_reversals == 0);
  CHECK(m.winding_turns <= -1.0);
}

TEST_CASE("halving the physics step barely moves the vessel") {
  Scenario s = bundled("case1");
  const Vec2 a = run(s).records.back().head;
  s.dt_physics = s.dt_control / 2;
  const Vec2 b = run(s).records.back().head;
  CHECK((a - b).norm() < 1e-3);
}

TEST_CASE("concentration and distance errors shrink while converging") {
  const Scenario s = bundled("advection");
  const RunLog log = run(s);
  const auto& blob = std::get<FrozenGaussian>(s.field);
  const double radius = *level_set_radius(blob, s.gains.c0);
  double conc[2] = {0, 0}, dist[2] = {0, 0};
  int count[2] = {0, 0};
  for (const auto& r : log.records) {
    if (r.t >= 10.0) break;
    const int w = r.t < 5.0 ? 0 : 1;
    conc[w] += std::pow(*r.c_true - s.gains.c0, 2);
    dist[w] += std::pow((r.head - blob.center_at(r.t)).norm() - radius, 2);
    ++count[w];
  }
  CHECK(conc[1] / count[1] < conc[0] / count[0]);
  CHECK(dist[1] / count[1] < dist[0] / count[0]);
}

TEST_CASE("metrics on synthetic paths") {
  Scenario s;
  s.gains.c0 = 50.0;
  SUBCASE("counter-clockwise unit circle") {
    const RunMetrics m = metrics(circle_log(1.0), s);
    CHECK(m.winding_turns == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(m.winding_sign == 1);
    CHECK(std::abs(m.patrol_speed_mean - 1.0) < 1e-4);
  }
  SUBCASE("clockwise") {
    const RunMetrics m = metrics(circle_log(-1.0), s);
    CHECK(m.winding_sign == -1);
    CHECK(m.winding_reversals == 0);
  }
  SUBCASE("standing still") {
    RunLog log;
    for (int n = 0; n < 10; ++n) {
      LogRecord r;
      r.t = 0.1 * n;
      r.head = Vec2(3, 4);
      log.records.push_back(r);
    }
    const RunMetrics m = metrics(log, s);
    CHECK(m.patrol_speed_mean == 0.0);
    CHECK(m.winding_turns == 0.0);
    CHECK(m.winding_sign == 0);
  }
}

TEST_CASE("level set radius") {
  const GaussianPuff p{0.0, Vec2::Zero(), 400 * kPi, 1.0};  // peak 100 at tau 1
  const FlowField still = FlowField::uniform(Vec2::Zero());
  const double r = *level_set_radius(p, 50.0, 1.0);
  CHECK(r == doctest::Approx(std::sqrt(4 * std::log(2.0))));
  CHECK(std::abs(puff_concentration(p, still, Vec2(r, 0), 1.0) - 50.0) < 1e-9);
  CHECK_FALSE(level_set_radius(GaussianPuff{0.0, Vec2::Zero(), 160 * kPi, 1.0}, 50.0, 1.0));
  CHECK(*level_set_radius(p, 100.0, 1.0) == 0.0);
}

TEST_CASE("csv round trip") {
  const Scenario s = bundled("case1");
  RunLog log = run(s);
  log.records.resize(20);
  const std::string text = csv_of(log);
  CHECK(text.substr(0, text.find('\n')) == kCsvHeader);
  std::istringstream in(text);
  const RunLog back = read_csv(in);
  REQUIRE(back.records.size() == 20);
  CHECK(csv_of(back) == text);

  std::istringstream broken("t,x\n1,2\n");
  CHECK_THROWS(read_csv(broken));
}

TEST_CASE("grid scenario leaving its domain is truncated") {
  Scenario s = bundled("grid_demo");
  // A level far outside the grid drags the vessel across the boundary.
  s.gains.c0 = 0.5;
  s.initial.position = Vec2(20.0, 0.0);
  s.initial.heading = 0.0;
  const RunLog log = run(s);
  CHECK(log.termination == Termination::kTruncated);
  CHECK(log.records.size() < 1201);
}
