#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace refa::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Two-space indented JSON with a trailing newline.
std::string dump_pretty(const nlohmann::json& j);

}  // namespace refa::io

namespace refa::io {

/// UTC wall-clock time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string utc_timestamp();

}  // namespace refa::io
