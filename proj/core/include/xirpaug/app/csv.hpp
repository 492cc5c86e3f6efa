#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace xirpaug::app {

/// Splits one CSV line on commas, honouring double quotes ("" escapes a quote).
[[nodiscard]] std::vector<std::string> split_csv_line(std::string_view line);

/// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// Windows as rows of comma-separated values.
void write_windows_csv(const std::filesystem::path& path, const std::vector<std::vector<double>>& windows);
[[nodiscard]] std::vector<std::vector<double>> read_windows_csv(const std::filesystem::path& path);

}  // namespace xirpaug::app
