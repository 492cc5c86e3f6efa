#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xirpaug/app/config.hpp"
#include "xirpaug/series.hpp"

namespace xirpaug::app {

struct IngestResult {
  std::vector<series::TimeSeries> series;
  std::vector<std::string> warnings;  ///< skipped rows
};

/// Frequency for a dataset id: the configured tag, or with "auto" the M4
/// prefix letter (D, W, M, Q, Y), falling back to `other`.
[[nodiscard]] series::Frequency resolve_frequency(const std::string& id, const std::string& frequency);

/// Rows `"<id>",v1,v2,...` with ragged lengths. An optional header row
/// (non-numeric values on the first line) is skipped, trailing empty cells
/// are dropped, each series keeps its last L values for its frequency, and
/// rows with fewer than `min_length` values are skipped with a warning.
/// Throws FileNotFound, or MalformedRow naming the 1-based line.
[[nodiscard]] IngestResult ingest_m4_csv(const std::filesystem::path& path, const std::string& frequency,
                                         const TruncationLengths& lengths, std::size_t min_length);

void write_m4_csv(const std::filesystem::path& path, std::span<const series::TimeSeries> data);

}  // namespace xirpaug::app
