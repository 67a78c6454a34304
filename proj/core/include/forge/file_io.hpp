#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace forge {

// Throws IoError.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// see either the old or the new content. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace forge
