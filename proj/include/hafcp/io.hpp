#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hafcp {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// RFC-4180 records: comma separated, double-quoted fields with "" escapes,
/// CRLF or LF line endings. A trailing newline does not yield an empty record.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

std::string csv_escape(const std::string& field);

}  // namespace hafcp
