#include "xirpaug/app/ingest.hpp"

#include <sstream>

#include "xirpaug/app/csv.hpp"
#include "xirpaug/error.hpp"
#include "xirpaug/format.hpp"

namespace xirpaug::app {
namespace {

bool parse_number(const std::string& cell, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(cell, &pos);
    while (pos < cell.size() && (cell[pos] == ' ' || cell[pos] == '\t')) ++pos;
    return pos == cell.size();
  } catch (const std::logic_error&) {
    return false;
  }
}

}  // namespace

series::Frequency resolve_frequency(const std::string& id, const std::string& frequency) {
  if (frequency != "auto") return series::parse_frequency(frequency);
  if (id.empty()) return series::Frequency::other;
  try {
    return series::parse_frequency(id.substr(0, 1));
  } catch (const Error&) {
    return series::Frequency::other;
  }
}

IngestResult ingest_m4_csv(const std::filesystem::path& path, const std::string& frequency,
                           const TruncationLengths& lengths, std::size_t min_length) {
  if (!std::filesystem::exists(path)) throw Error(Errc::FileNotFound, path.string());
  std::stringstream in(read_file(path));
  IngestResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    while (cells.size() > 1 && cells.back().find_first_not_of(" \t") == std::string::npos) cells.pop_back();
    const std::string id = cells.front();
    if (id.empty()) throw Error(Errc::MalformedRow, "row " + std::to_string(lineno) + ": empty id");

    std::vector<double> values;
    values.reserve(cells.size() - 1);
    bool numeric = true;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      double v = 0.0;
      if (cells[i].find_first_not_of(" \t") == std::string::npos) {
        throw Error(Errc::MalformedRow, "row " + std::to_string(lineno) + ": gap at column " + std::to_string(i + 1));
      }
      if (!parse_number(cells[i], v)) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (lineno == 1 && result.series.empty()) continue;  // header
      throw Error(Errc::MalformedRow, "row " + std::to_string(lineno) + ": non-numeric value");
    }

    const auto freq = resolve_frequency(id, frequency);
    if (const std::size_t keep = lengths.for_frequency(freq); keep > 0 && values.size() > keep) {
      values.erase(values.begin(), values.end() - static_cast<std::ptrdiff_t>(keep));
    }
    if (values.size() < std::max<std::size_t>(min_length, 2)) {
      result.warnings.push_back("row " + std::to_string(lineno) + " (" + id + "): " + std::to_string(values.size()) +
                                " values, need " + std::to_string(std::max<std::size_t>(min_length, 2)) + "; skipped");
      continue;
    }
    try {
      result.series.push_back(series::make_series(id, freq, std::move(values)));
    } catch (const Error& e) {
      throw Error(Errc::MalformedRow, "row " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return result;
}

void write_m4_csv(const std::filesystem::path& path, std::span<const series::TimeSeries> data) {
  std::string out;
  for (const auto& s : data) {
    out += '"' + s.id + '"';
    for (double v : s.values) out += ',' + format_double(v);
    out += '\n';
  }
  write_atomic(path, out);
}

}  // namespace xirpaug::app
