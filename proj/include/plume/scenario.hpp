#pragma once

// Scenario files: a versioned JSON document describing one complete run.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "plume/errors.hpp"
#include "plume/field.hpp"
#include "plume/guidance.hpp"
#include "plume/sensing.hpp"
#include "plume/vessel.hpp"

namespace plume {

inline constexpr int kScenarioSchema = 1;

// Invalid scenario document. `field` is the dotted path of the offending
// entry (empty when the document as a whole is at fault) and `line` the
// 1-based source line when known.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, const std::string& message,
                std::optional<int> line = std::nullopt);

  const std::string& field() const { return field_; }
  std::optional<int> line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string field_;
  std::string detail_;
  std::optional<int> line_;
};

struct Scenario {
  std::string name;
  ConcentrationField field = FrozenGaussian{};
  SensorRig rig = SensorRig::cross(0.75);
  NoiseModel noise;
  double flow_noise_sigma = 0.0;  // m/s, applied to the flow measurement
  VesselParams vessel;
  VesselState initial;
  GuidanceGains gains;
  SignConvention sign = SignConvention::kPdeDerived;
  TrackedPoint tracked = TrackedPoint::kHead;
  double duration = 60.0;
  double dt_control = 0.05;
  double dt_physics = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
};

Scenario parse_scenario(const nlohmann::json& doc);

// Reads and parses a file; errors carry the source line where possible.
nlohmann::json read_scenario_json(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

// 1-based line of the entry at a dotted path in a JSON text, if found.
std::optional<int> locate_line(const std::string& text, const std::string& dotted);

// Replaces the value at a dotted path; the path must already exist.
void set_dotted(nlohmann::json& doc, const std::string& dotted,
                const nlohmann::json& value);

}  // namespace plume
