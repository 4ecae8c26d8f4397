#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "plume/cli.hpp"

using namespace plume;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "plume");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scenario(const std::string& name) {
  return std::string(PLUME_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("plume_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("run writes the log and metrics") {
  const fs::path out = scratch("run");
  const Result r = cli({"run", scenario("case1"), "--out", out.string(), "--seed", "7"});
  CHECK(r.code == kExitOk);
  CHECK(lines(slurp(out / "log.csv")) == 1202);
  const auto m = nlohmann::json::parse(slurp(out / "metrics.json"));
  CHECK(m["seed"] == 7);
  CHECK(m["scenario"] == "case1");
  CHECK(m["termination"] == "completed");
  for (const auto& e : fs::directory_iterator(out)) {
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
  }
}

TEST_CASE("run reports input errors") {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  auto doc = nlohmann::json::parse(slurp(scenario("case1")));
  doc["gains"].erase("k2");
  std::ofstream(dir / "s.json") << doc.dump(2);
  const Result r = cli({"run", (dir / "s.json").string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("gains.k2") != std::string::npos);
  CHECK(std::regex_search(r.err, std::regex("line [0-9]+")));
  CHECK(r.out.empty());

  CHECK(cli({"run", (dir / "missing.json").string(), "--out", (dir / "o").string()}).code == kExitInput);
  CHECK(cli({"frobnicate"}).code == kExitInput);
  CHECK(cli({}).code == kExitInput);
}

TEST_CASE("run exit code for a truncated grid run") {
  const fs::path dir = scratch("trunc");
  fs::create_directories(dir);
  auto doc = nlohmann::json::parse(slurp(scenario("grid_demo")));
  doc["vessel"]["initial_pose"] = {20.0, 0.0, 0.0};
  doc["gains"]["c0"] = 0.5;
  std::ofstream(dir / "s.json") << doc.dump(2);
  const Result r = cli({"run", (dir / "s.json").string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitTruncated);
  CHECK(fs::exists(dir / "o" / "log.csv"));
}

TEST_CASE("run exit code for a degenerate stencil") {
  const fs::path dir = scratch("degenerate");
  fs::create_directories(dir);
  auto doc = nlohmann::json::parse(slurp(scenario("case1")));
  // Valid but nearly collinear: accepted by the parser, rejected by the estimator.
  doc["rig"] = {{"layout", "custom"}, {"offsets", {{-1.5, 0}, {-0.5, 1e-6}, {0.5, -1e-6}, {1.5, 0}}}};
  std::ofstream(dir / "s.json") << doc.dump(2);
  const Result r = cli({"run", (dir / "s.json").string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitNumerical);
  const auto m = nlohmann::json::parse(slurp(dir / "o" / "metrics.json"));
  CHECK(m["termination"] == "aborted");

  doc["rig"]["offsets"] = {{-1.5, 0}, {-0.5, 0}, {0.5, 0}, {1.5, 0}};
  std::ofstream(dir / "s.json") << doc.dump(2);
  CHECK(cli({"run", (dir / "s.json").string(), "--out", (dir / "o2").string()}).code == kExitInput);
}

TEST_CASE("sweep product and determinism") {
  const fs::path a = scratch("sweep_a");
  const fs::path b = scratch("sweep_b");
  const std::vector<std::string> sets = {"--set", "gains.k1=2,5,10", "--set", "gains.k2=5,11"};
  std::vector<std::string> args = {"sweep", scenario("case1")};
  args.insert(args.end(), sets.begin(), sets.end());
  auto one = args, eight = args;
  one.insert(one.end(), {"--out", a.string(), "--jobs", "1"});
  eight.insert(eight.end(), {"--out", b.string(), "--jobs", "8"});
  CHECK(cli(one).code == kExitOk);
  CHECK(cli(eight).code == kExitOk);
  const std::string summary = slurp(a / "sweep_summary.csv");
  CHECK(lines(summary) == 7);
  CHECK(summary == slurp(b / "sweep_summary.csv"));
  CHECK(summary.find("\n0,2,5,") != std::string::npos);
  CHECK(summary.find("\n5,10,11,") != std::string::npos);
  CHECK(fs::exists(a / "run_005" / "log.csv"));
  CHECK(slurp(a / "run_003" / "log.csv") == slurp(b / "run_003" / "log.csv"));
}

TEST_CASE("sweep rejects unknown paths") {
  const Result r = cli({"sweep", scenario("case1"), "--set", "gains.k9=1,2", "--out", scratch("sweep_bad").string()});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("gains.k9") != std::string::npos);
}

TEST_CASE("sweep over the sign convention") {
  const fs::path out = scratch("sweep_sign");
  const Result r = cli({"sweep", scenario("advection"), "--set",
                        "controller.sign_convention=paper-literal,pde-derived", "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(slurp(out / "sweep_summary.csv"));
  std::string header, literal, derived;
  std::getline(in, header);
  std::getline(in, literal);
  std::getline(in, derived);
  auto column = [&](const std::string& row, const std::string& name) {
    std::vector<std::string> h, v;
    std::string cell;
    std::istringstream hs(header), vs(row);
    while (std::getline(hs, cell, ',')) h.push_back(cell);
    while (std::getline(vs, cell, ',')) v.push_back(cell);
    const auto at = std::find(h.begin(), h.end(), name) - h.begin();
    return std::stod(v.at(static_cast<std::size_t>(at)));
  };
  CHECK(column(derived, "rms_concentration_error") < column(literal, "rms_concentration_error"));
}

TEST_CASE("plots") {
  const fs::path out = scratch("plot");
  REQUIRE(cli({"run", scenario("case1"), "--out", out.string()}).code == kExitOk);
  const std::string log = (out / "log.csv").string();

  SUBCASE("timeseries") {
    const Result r = cli({"plot", "--kind", "concentration-timeseries", "--log", log, "--out",
                          (out / "ts.svg").string(), "--c0", "50"});
    REQUIRE(r.code == kExitOk);
    const std::string svg = slurp(out / "ts.svg");
    std::size_t count = 0;
    for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++count;
    CHECK(count == 6);

    // Map the reference line's pixel row back to data units.
    std::smatch m;
    REQUIRE(std::regex_search(svg, m, std::regex("data-y-range=\"([-0-9.e+]+) ([-0-9.e+]+)\"")));
    const double lo = std::stod(m[1]), hi = std::stod(m[2]);
    REQUIRE(std::regex_search(svg, m, std::regex("class=\"reference\"[^>]*points=\"[0-9.]+,([0-9.]+)")));
    const double y = hi - (std::stod(m[1]) - 30.0) / 400.0 * (hi - lo);
    CHECK(y == doctest::Approx(50.0).epsilon(0.01));

    CHECK(cli({"plot", "--kind", "concentration-timeseries", "--log", log, "--out",
               (out / "ts2.svg").string(), "--c0", "50"}).code == kExitOk);
    CHECK(slurp(out / "ts.svg") == slurp(out / "ts2.svg"));
  }
  SUBCASE("trajectory") {
    const Result r = cli({"plot", "--kind", "trajectory-xy", "--log", log, "--out",
                          (out / "xy.svg").string(), "--scenario", scenario("case1")});
    REQUIRE(r.code == kExitOk);
    const std::string svg = slurp(out / "xy.svg");
    CHECK(svg.find("head-path") != std::string::npos);
    CHECK(svg.find("source-path") != std::string::npos);
    CHECK(svg.find("class=\"start\"") != std::string::npos);
    CHECK(svg.find("class=\"end\"") != std::string::npos);
  }
  SUBCASE("bad inputs") {
    std::ofstream(out / "empty.csv") << slurp(log).substr(0, slurp(log).find('\n') + 1);
    CHECK(cli({"plot", "--kind", "trajectory-xy", "--log", (out / "empty.csv").string(), "--out",
               (out / "e.svg").string()}).code == kExitInput);
    std::ofstream(out / "junk.csv") << "hello\n1,2,3\n";
    CHECK(cli({"plot", "--kind", "trajectory-xy", "--log", (out / "junk.csv").string(), "--out",
               (out / "j.svg").string()}).code == kExitInput);
    CHECK(cli({"plot", "--kind", "concentration-timeseries", "--log", log, "--out",
               (out / "n.svg").string()}).code == kExitInput);
    CHECK(cli({"plot", "--kind", "pie", "--log", log, "--out", (out / "p.svg").string()}).code == kExitInput);
  }
}

TEST_CASE("validate") {
  const Result ok = cli({"validate"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("FAIL") == std::string::npos);

  const Result printed = cli({"validate", "--printed-inverse"});
  CHECK(printed.code != kExitOk);
  CHECK(printed.out.find("FAIL  input transform identity") != std::string::npos);

  const Result asym = cli({"validate", "--rig", "asymmetric"});
  CHECK(asym.code == kExitOk);
}
