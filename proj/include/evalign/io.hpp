#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace evalign {

/// Whole-file read; throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe partial output. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace evalign
