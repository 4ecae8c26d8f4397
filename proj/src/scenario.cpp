#include "plume/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

namespace plume {

using nlohmann::json;

namespace {

std::string compose(const std::string& field, const std::string& message,
                    std::optional<int> line) {
  std::string out;
  if (line) out += "line " + std::to_string(*line) + ": ";
  if (!field.empty()) out += field + ": ";
  return out + message;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Strict view of a JSON object: every key must be consumed before finish().
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ScenarioError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& child(const std::string& key) {
    if (!obj_.contains(key)) throw ScenarioError(join(path_, key), "missing required field");
    used_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key) {
    const json& v = child(key);
    if (!v.is_number()) throw ScenarioError(join(path_, key), "expected a number");
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::int64_t integer(const std::string& key) {
    const json& v = child(key);
    if (!v.is_number_integer()) throw ScenarioError(join(path_, key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = child(key);
    if (!v.is_string()) throw ScenarioError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  Vec2 vec2(const std::string& key) { return to_vec2(child(key), join(path_, key)); }

  static Vec2 to_vec2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ScenarioError(path, "expected a 2-element numeric array");
    }
    return Vec2(v[0].get<double>(), v[1].get<double>());
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) throw ScenarioError(join(path_, key), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

// Runs a constructor-style validation and reattributes its error to a path.
template <typename F>
auto attributed(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    throw ScenarioError(path, e.what());
  }
}

FlowField parse_flow(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string mode = r.string("mode");
  FlowField flow;
  if (mode == "uniform") {
    flow = FlowField::uniform(r.vec2("velocity"));
  } else if (mode == "piecewise") {
    const json& vs = r.child("velocities");
    const json& bs = r.child("boundaries");
    if (!vs.is_array() || !bs.is_array()) {
      throw ScenarioError(path, "velocities and boundaries must be arrays");
    }
    std::vector<Vec2> velocities;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      velocities.push_back(ObjectReader::to_vec2(vs[i], r.path("velocities")));
    }
    std::vector<double> boundaries;
    for (const auto& b : bs) {
      if (!b.is_number()) throw ScenarioError(r.path("boundaries"), "expected numbers");
      boundaries.push_back(b.get<double>());
    }
    flow = attributed(path, [&] { return FlowField::piecewise(velocities, boundaries); });
  } else {
    throw ScenarioError(r.path("mode"), "expected 'uniform' or 'piecewise'");
  }
  r.finish();
  return flow;
}

ConcentrationField parse_puff_plume(ObjectReader& r, const std::string& path) {
  const double k = r.number("k");
  FlowField flow = parse_flow(r.child("flow"), r.path("flow"));
  if (!flow.is_uniform()) {
    throw ScenarioError(r.path("flow"), "puff plume requires uniform flow");
  }
  std::vector<GaussianPuff> puffs;
  if (r.has("puffs")) {
    const json& arr = r.child("puffs");
    if (!arr.is_array()) throw ScenarioError(r.path("puffs"), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ObjectReader p(arr[i], r.path("puffs") + "[" + std::to_string(i) + "]");
      GaussianPuff puff;
      puff.release_time = p.number("release_time");
      puff.release_point = p.vec2("point");
      puff.strength = p.number("strength");
      puff.k = k;
      p.finish();
      puffs.push_back(puff);
    }
  }
  std::optional<Emission> emission;
  if (r.has("emission")) {
    ObjectReader e(r.child("emission"), r.path("emission"));
    Emission em;
    em.source = e.vec2("source");
    em.rate = e.number("rate");
    em.interval = e.number("interval", 0.5);
    em.start_time = e.number("start_time", 0.0);
    e.finish();
    emission = em;
  }
  return attributed(path, [&] {
    return ConcentrationField{PuffPlume(flow, k, std::move(puffs), emission)};
  });
}

ConcentrationField parse_frozen(ObjectReader& r, const std::string& path) {
  FrozenGaussian f;
  f.peak = r.number("peak");
  f.sigma = r.number("sigma");
  f.center = r.vec2("center");
  f.flow = parse_flow(r.child("flow"), r.path("flow"));
  if (!(f.peak > 0.0) || !(f.sigma > 0.0)) {
    throw ScenarioError(path, "peak and sigma must be positive");
  }
  if (!f.flow.is_uniform()) {
    throw ScenarioError(r.path("flow"), "frozen Gaussian requires uniform flow");
  }
  return f;
}

ConcentrationField parse_grid(ObjectReader& r, const std::string& path) {
  const Vec2 origin = r.vec2("origin");
  const double h = r.number("cell_size");
  const auto nx = r.integer("nx");
  const auto ny = r.integer("ny");
  const double k = r.number("k");
  FlowField flow = parse_flow(r.child("flow"), r.path("flow"));
  const std::string b = r.string("boundary", "outflow");
  Boundary boundary;
  if (b == "outflow") {
    boundary = Boundary::kOutflow;
  } else if (b == "periodic") {
    boundary = Boundary::kPeriodic;
  } else {
    throw ScenarioError(r.path("boundary"), "expected 'outflow' or 'periodic'");
  }
  GridField grid = attributed(path, [&] {
    return GridField(origin, h, static_cast<int>(nx), static_cast<int>(ny), k, flow,
                     boundary);
  });

  ObjectReader init(r.child("initial"), r.path("initial"));
  const std::string type = init.string("type");
  if (type == "gaussian") {
    FrozenGaussian blob;
    blob.peak = init.number("peak");
    blob.sigma = init.number("sigma");
    blob.center = init.vec2("center");
    if (blob.peak < 0.0 || !(blob.sigma > 0.0)) {
      throw ScenarioError(r.path("initial"), "peak must be >= 0 and sigma > 0");
    }
    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i) {
        grid.at(i, j) = blob.eval(grid.cell_center(i, j), 0.0).c;
      }
    }
  } else if (type == "uniform") {
    const double value = init.number("value");
    if (value < 0.0) throw ScenarioError(init.path("value"), "must be >= 0");
    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i) grid.at(i, j) = value;
    }
  } else {
    throw ScenarioError(init.path("type"), "expected 'gaussian' or 'uniform'");
  }
  init.finish();
  return grid;
}

ConcentrationField parse_field(const json& j) {
  ObjectReader r(j, "field");
  const std::string type = r.string("type");
  ConcentrationField field = FrozenGaussian{};
  if (type == "puff_plume") {
    field = parse_puff_plume(r, "field");
  } else if (type == "frozen_gaussian") {
    field = parse_frozen(r, "field");
  } else if (type == "grid") {
    field = parse_grid(r, "field");
  } else {
    throw ScenarioError("field.type", "expected 'puff_plume', 'frozen_gaussian' or 'grid'");
  }
  r.finish();
  return field;
}

SensorRig parse_rig(const json& j) {
  ObjectReader r(j, "rig");
  SensorRig rig;
  const std::string layout = r.string("layout", "cross");
  if (layout == "cross") {
    rig = SensorRig::cross(r.number("arm", 0.75));
  } else if (layout == "asymmetric") {
    rig = SensorRig::asymmetric();
  } else if (layout == "custom") {
    const json& offs = r.child("offsets");
    if (!offs.is_array() || offs.size() != kSensorCount) {
      throw ScenarioError(r.path("offsets"), "expected exactly 4 offsets");
    }
    for (int i = 0; i < kSensorCount; ++i) {
      rig.offsets[i] = ObjectReader::to_vec2(offs[i], r.path("offsets"));
    }
  } else {
    throw ScenarioError(r.path("layout"), "expected 'cross', 'asymmetric' or 'custom'");
  }
  r.finish();
  attributed("rig", [&] { rig.validate(); return 0; });
  return rig;
}

}  // namespace

ScenarioError::ScenarioError(std::string field, const std::string& message,
                             std::optional<int> line)
    : Error(compose(field, message, line)),
      field_(std::move(field)),
      detail_(message),
      line_(line) {}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ScenarioError("duration", "must be positive");
  if (!(dt_control > 0.0)) throw ScenarioError("dt_control", "must be positive");
  if (!(dt_physics > 0.0) || dt_physics > dt_control) {
    throw ScenarioError("dt_physics", "must satisfy 0 < dt_physics <= dt_control");
  }
  if (flow_noise_sigma < 0.0) throw ScenarioError("noise.flow_sigma", "must be >= 0");
  attributed("rig", [&] { rig.validate(); return 0; });
  attributed("noise", [&] { noise.validate(); return 0; });
  attributed("vessel", [&] { vessel.validate(); return 0; });
  attributed("gains", [&] { gains.validate(); return 0; });
}

Scenario parse_scenario(const json& doc) {
  ObjectReader r(doc, "");
  Scenario s;
  const auto schema = r.integer("schema");
  if (schema != kScenarioSchema) {
    throw ScenarioError("schema", "unsupported schema version " + std::to_string(schema));
  }
  s.name = r.string("name", "");
  s.field = parse_field(r.child("field"));
  s.rig = r.has("rig") ? parse_rig(r.child("rig")) : SensorRig::cross(0.75);

  if (r.has("noise")) {
    ObjectReader n(r.child("noise"), "noise");
    s.noise.sigma = n.number("sigma", s.noise.sigma);
    s.noise.floor = n.number("floor", s.noise.floor);
    s.noise.range_max = n.number("range_max", s.noise.range_max);
    s.flow_noise_sigma = n.number("flow_sigma", 0.0);
    n.finish();
  }

  {
    ObjectReader v(r.child("vessel"), "vessel");
    s.vessel.offset = v.number("l0", s.vessel.offset);
    s.vessel.nu_max = v.number("nu_max", s.vessel.nu_max);
    s.vessel.omega_max = v.number("omega_max", s.vessel.omega_max);
    const json& pose = v.child("initial_pose");
    if (!pose.is_array() || pose.size() != 3 || !pose[0].is_number() ||
        !pose[1].is_number() || !pose[2].is_number()) {
      throw ScenarioError("vessel.initial_pose", "expected [x, y, theta]");
    }
    s.initial.position = Vec2(pose[0].get<double>(), pose[1].get<double>());
    s.initial.heading = normalize_angle(pose[2].get<double>());
    v.finish();
  }

  {
    ObjectReader g(r.child("gains"), "gains");
    s.gains.c0 = g.number("c0");
    s.gains.k = g.number("k");
    s.gains.k1 = g.number("k1");
    s.gains.k2 = g.number("k2");
    s.gains.vd = g.number("vd");
    s.gains.grad_floor = g.number("grad_floor", s.gains.grad_floor);
    g.finish();
  }

  if (r.has("controller")) {
    ObjectReader c(r.child("controller"), "controller");
    const std::string sign = c.string("sign_convention", "pde-derived");
    const std::string tracked = c.string("tracked_point", "head");
    attributed("controller.sign_convention",
               [&] { s.sign = parse_sign_convention(sign); return 0; });
    attributed("controller.tracked_point",
               [&] { s.tracked = parse_tracked_point(tracked); return 0; });
    c.finish();
  }

  s.duration = r.number("duration");
  s.dt_control = r.number("dt_control", s.dt_control);
  s.dt_physics = r.number("dt_physics", s.dt_control);
  if (r.has("seed")) {
    const auto seed = r.integer("seed");
    if (seed < 0) throw ScenarioError("seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  r.finish();
  s.validate();
  return s;
}

std::optional<int> locate_line(const std::string& text, const std::string& dotted) {
  // Target as components: "a.b[2].c" -> a, b, [2], c.
  std::vector<std::string> target;
  std::stringstream parts(dotted);
  std::string part;
  while (std::getline(parts, part, '.')) {
    const auto bracket = part.find('[');
    if (bracket != 0 && !part.empty()) target.push_back(part.substr(0, bracket));
    for (auto b = bracket; b != std::string::npos; b = part.find('[', b + 1)) {
      target.push_back(part.substr(b, part.find(']', b) - b + 1));
    }
  }
  if (target.empty()) return std::nullopt;

  struct Frame {
    bool array = false;
    std::string key;
    int index = 0;
    bool expect_key = true;
  };
  std::vector<Frame> stack;
  int line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
    } else if (ch == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) ++i;
        s += text[i];
      }
      if (stack.empty() || stack.back().array || !stack.back().expect_key) continue;
      stack.back().key = s;
      std::vector<std::string> path;
      for (const auto& f : stack) {
        path.push_back(f.array ? "[" + std::to_string(f.index) + "]" : f.key);
      }
      if (path == target) return line;
    } else if (ch == '{' || ch == '[') {
      Frame f;
      f.array = ch == '[';
      stack.push_back(f);
    } else if (ch == '}' || ch == ']') {
      if (!stack.empty()) stack.pop_back();
    } else if (ch == ',' && !stack.empty()) {
      if (stack.back().array) {
        ++stack.back().index;
      } else {
        stack.back().expect_key = true;
      }
    } else if (ch == ':' && !stack.empty()) {
      stack.back().expect_key = false;
    }
  }
  return std::nullopt;
}

json read_scenario_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto offset = std::min<std::size_t>(e.byte, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
    throw ScenarioError("", std::string("malformed JSON: ") + e.what(), line);
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json doc = read_scenario_json(path);
  try {
    return parse_scenario(doc);
  } catch (const ScenarioError& e) {
    if (e.line() || e.field().empty()) throw;
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    // A missing key has no line of its own; point at the closest enclosing one.
    const std::string text = buf.str();
    std::string anchor = e.field();
    std::optional<int> line = locate_line(text, anchor);
    while (!line && anchor.find('.') != std::string::npos) {
      anchor.erase(anchor.rfind('.'));
      line = locate_line(text, anchor);
    }
    throw ScenarioError(e.field(), e.detail(), line);
  }
}

void set_dotted(json& doc, const std::string& dotted, const json& value) {
  json* node = &doc;
  std::stringstream parts(dotted);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (!node->is_object() || !node->contains(part)) {
      throw ScenarioError(dotted, "unknown parameter path");
    }
    node = &(*node)[part];
  }
  if (node == &doc) throw ScenarioError(dotted, "empty parameter path");
  if (node->is_object() || node->is_array()) {
    throw ScenarioError(dotted, "parameter path does not address a scalar");
  }
  *node = value;
}

}  // namespace plume
