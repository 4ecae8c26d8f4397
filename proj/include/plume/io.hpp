#pragma once

#include <filesystem>
#include <string_view>

namespace plume {

// Writes through a temporary sibling file and renames it into place, so a
// reader never observes a partially written file under the final name.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace plume
