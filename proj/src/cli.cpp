#include "plume/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "plume/errors.hpp"
#include "plume/io.hpp"
#include "plume/log.hpp"
#include "plume/plot.hpp"
#include "plume/scenario.hpp"
#include "plume/simulator.hpp"
#include "plume/validate.hpp"

namespace plume {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kCompleted: return "completed";
    case Termination::kTruncated: return "truncated";
    case Termination::kAborted: return "aborted";
  }
  return "unknown";
}

int exit_code(Termination t) {
  switch (t) {
    case Termination::kCompleted: return kExitOk;
    case Termination::kTruncated: return kExitTruncated;
    case Termination::kAborted: return kExitNumerical;
  }
  return kExitNumerical;
}

struct RunOutcome {
  RunLog log;
  RunMetrics metrics;
  json metrics_json;
};

RunOutcome execute(const Scenario& scenario) {
  RunOutcome o;
  o.log = run(scenario);
  o.metrics = metrics(o.log, scenario);
  o.metrics_json = to_json(o.metrics);
  o.metrics_json["scenario"] = scenario.name;
  o.metrics_json["sign_convention"] = std::string(to_string(scenario.sign));
  o.metrics_json["termination"] = std::string(to_string(o.log.termination));
  if (!o.log.message.empty()) o.metrics_json["message"] = o.log.message;
  return o;
}

void write_outputs(const fs::path& dir, const RunOutcome& o) {
  fs::create_directories(dir);
  std::ostringstream csv;
  write_csv(csv, o.log);
  write_atomic(dir / "log.csv", csv.str());
  write_atomic(dir / "metrics.json", o.metrics_json.dump(2) + "\n");
}

// Input problems map to exit 2, everything else numerical to exit 4.
int report(const std::exception& e, std::ostream& err, const std::string& context) {
  err << "error: " << context << e.what() << '\n';
  if (dynamic_cast<const ScenarioError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const ModelValidityError*>(&e) || dynamic_cast<const InputError*>(&e)) {
    return kExitInput;
  }
  return kExitNumerical;
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

json parse_value(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (!text.empty() && *end == '\0') {
    if (text.find_first_of(".eE") == std::string::npos) {
      return json(static_cast<std::int64_t>(std::llround(v)));
    }
    return json(v);
  }
  return json(text);
}

struct SweepAxis {
  std::string path;
  std::vector<json> values;
};

}  // namespace

int cmd_run(const fs::path& scenario_path, const fs::path& out_dir,
            std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_scenario(scenario_path);
  } catch (const std::exception& e) {
    return report(e, err, scenario_path.string() + ": ");
  }
  if (seed) scenario.seed = *seed;
  try {
    const RunOutcome o = execute(scenario);
    write_outputs(out_dir, o);
    out << "wrote " << (out_dir / "log.csv").string() << " (" << o.log.records.size()
        << " records), termination " << to_string(o.log.termination) << '\n';
    if (!o.log.message.empty()) err << o.log.message << '\n';
    return exit_code(o.log.termination);
  } catch (const std::exception& e) {
    return report(e, err, "");
  }
}

int cmd_sweep(const fs::path& scenario_path, const std::vector<std::string>& sets,
              const fs::path& out_dir, int jobs, std::ostream& out, std::ostream& err) {
  json base;
  try {
    base = read_scenario_json(scenario_path);
  } catch (const std::exception& e) {
    return report(e, err, scenario_path.string() + ": ");
  }

  std::vector<SweepAxis> axes;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
      err << "error: --set expects key=v1,v2,... but got '" << s << "'\n";
      return kExitInput;
    }
    SweepAxis axis;
    axis.path = s.substr(0, eq);
    std::stringstream vs(s.substr(eq + 1));
    std::string item;
    while (std::getline(vs, item, ',')) axis.values.push_back(parse_value(item));
    try {
      json probe = base;
      set_dotted(probe, axis.path, axis.values.front());
    } catch (const std::exception& e) {
      return report(e, err, "");
    }
    axes.push_back(std::move(axis));
  }

  // Cartesian product; the first axis varies slowest.
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  std::vector<Scenario> scenarios;
  std::vector<std::vector<json>> combos;
  for (std::size_t n = 0; n < total; ++n) {
    std::vector<json> combo(axes.size());
    std::size_t rem = n;
    for (std::size_t a = axes.size(); a-- > 0;) {
      combo[a] = axes[a].values[rem % axes[a].values.size()];
      rem /= axes[a].values.size();
    }
    json doc = base;
    try {
      for (std::size_t a = 0; a < axes.size(); ++a) set_dotted(doc, axes[a].path, combo[a]);
      scenarios.push_back(parse_scenario(doc));
    } catch (const std::exception& e) {
      return report(e, err, "sweep combination " + std::to_string(n) + ": ");
    }
    combos.push_back(std::move(combo));
  }

  std::vector<std::optional<RunOutcome>> outcomes(total);
  std::vector<std::string> failures(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        outcomes[i] = execute(scenarios[i]);
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu", i);
        write_outputs(out_dir / name, *outcomes[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  int code = kExitOk;
  std::ostringstream summary;
  summary << "run";
  for (const auto& a : axes) summary << ',' << a.path;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < total; ++i) {
    if (!outcomes[i]) continue;
    for (const auto& [k, v] : outcomes[i]->metrics_json.items()) {
      if (!v.is_structured()) keys.push_back(k);
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  // A swept path that is also a metric (seed) is reported once, as the parameter.
  std::erase_if(keys, [&](const std::string& k) {
    return std::any_of(axes.begin(), axes.end(), [&](const SweepAxis& a) { return a.path == k; });
  });
  for (const auto& k : keys) summary << ',' << k;
  summary << '\n';
  for (std::size_t i = 0; i < total; ++i) {
    if (!outcomes[i]) {
      err << "error: sweep run " << i << " failed: " << failures[i] << '\n';
      code = std::max(code, static_cast<int>(kExitNumerical));
      continue;
    }
    code = std::max(code, exit_code(outcomes[i]->log.termination));
    summary << i;
    for (const auto& v : combos[i]) summary << ',' << cell(v);
    for (const auto& k : keys) {
      const auto& m = outcomes[i]->metrics_json;
      summary << ',' << (m.contains(k) ? cell(m.at(k)) : "");
    }
    summary << '\n';
  }
  fs::create_directories(out_dir);
  write_atomic(out_dir / "sweep_summary.csv", summary.str());
  out << "wrote " << total << " runs and " << (out_dir / "sweep_summary.csv").string() << '\n';
  return code;
}

int cmd_plot(const std::string& kind_text, const fs::path& log_path, const fs::path& svg,
             std::optional<double> c0, const std::optional<fs::path>& scenario_path,
             std::ostream& out, std::ostream& err) {
  try {
    const PlotKind kind = parse_plot_kind(kind_text);
    std::ifstream in(log_path);
    if (!in) throw InputError("cannot open log " + log_path.string());
    const RunLog log = read_csv(in);
    if (log.records.empty()) throw InputError("log " + log_path.string() + " has no records");

    std::string text;
    if (kind == PlotKind::kTimeseries) {
      if (!c0) throw InputError("concentration-timeseries needs --c0");
      text = render_timeseries(log, *c0);
    } else {
      std::vector<Vec2> source;
      if (scenario_path) {
        const Scenario s = load_scenario(*scenario_path);
        if (is_analytic(s.field)) {
          for (const auto& r : log.records) {
            if (auto c = field_centroid(s.field, r.t)) source.push_back(*c);
          }
        }
      }
      text = render_trajectory(log, source);
    }
    if (svg.has_parent_path()) fs::create_directories(svg.parent_path());
    write_atomic(svg, text);
    out << "wrote " << svg.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report(e, err, "");
  }
}

int cmd_validate(bool printed_inverse, const std::string& rig, std::ostream& out,
                 std::ostream& err) {
  ValidationOptions options;
  options.printed_inverse = printed_inverse;
  if (rig == "asymmetric") {
    options.rig = SensorRig::asymmetric();
  } else if (rig != "cross") {
    err << "error: unknown rig '" << rig << "'\n";
    return kExitInput;
  }
  bool all = true;
  for (const auto& r : run_validation(options)) {
    out << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ")\n";
    all = all && r.passed;
  }
  return all ? kExitOk : kExitFailure;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plume level-curve tracking simulator", "plume"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");

  std::vector<std::string> sets;
  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cartesian parameter sweep");
  sweep_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  sweep_cmd->add_option("--set", sets, "dotted.path=v1,v2,...")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string kind;
  std::string log_path;
  std::string svg;
  std::optional<double> c0;
  std::optional<std::string> plot_scenario;
  auto* plot_cmd = app.add_subcommand("plot", "Render an SVG figure from a log");
  plot_cmd->add_option("--kind", kind, "trajectory-xy | concentration-timeseries")->required();
  plot_cmd->add_option("--log", log_path, "Run log CSV")->required();
  plot_cmd->add_option("--out", svg, "Output SVG")->required();
  plot_cmd->add_option("--c0", c0, "Reference concentration");
  plot_cmd->add_option("--scenario", plot_scenario, "Scenario, to draw the plume centroid path");

  bool printed_inverse = false;
  std::string rig = "cross";
  auto* validate_cmd = app.add_subcommand("validate", "Run the invariant suite");
  validate_cmd->add_flag("--printed-inverse", printed_inverse,
                         "Use the printed (incorrect) input-matrix inverse");
  validate_cmd->add_option("--rig", rig, "cross | asymmetric");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  if (run_cmd->parsed()) return cmd_run(scenario, out_dir, seed, out, err);
  if (sweep_cmd->parsed()) return cmd_sweep(scenario, sets, out_dir, jobs, out, err);
  if (plot_cmd->parsed()) {
    std::optional<fs::path> sp;
    if (plot_scenario) sp = *plot_scenario;
    return cmd_plot(kind, log_path, svg, c0, sp, out, err);
  }
  if (validate_cmd->parsed()) return cmd_validate(printed_inverse, rig, out, err);
  return kExitInput;
}

}  // namespace plume
