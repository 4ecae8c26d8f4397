#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace plume {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // validation property failed
  kExitInput = 2,
  kExitTruncated = 3,
  kExitNumerical = 4,
};

int cmd_run(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err);

// Each entry is "dotted.path=v1,v2,...".
int cmd_sweep(const std::filesystem::path& scenario, const std::vector<std::string>& sets,
              const std::filesystem::path& out_dir, int jobs, std::ostream& out,
              std::ostream& err);

int cmd_plot(const std::string& kind, const std::filesystem::path& log,
             const std::filesystem::path& svg, std::optional<double> c0,
             const std::optional<std::filesystem::path>& scenario, std::ostream& out,
             std::ostream& err);

int cmd_validate(bool printed_inverse, const std::string& rig, std::ostream& out,
                 std::ostream& err);

// Full command-line entry point: `plume run|sweep|plot|validate ...`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plume
