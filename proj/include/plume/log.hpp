#pragma once

#include <string_view>

namespace plume {

// Diagnostics on standard error, enabled by PLUME_LOG=debug|info.
void log_info(std::string_view message);
void log_debug(std::string_view message);

}  // namespace plume
