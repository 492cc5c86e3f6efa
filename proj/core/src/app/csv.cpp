#include "xirpaug/app/csv.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "xirpaug/error.hpp"
#include "xirpaug/format.hpp"

namespace xirpaug::app {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "rename to " + path.string() + " failed: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_windows_csv(const std::filesystem::path& path, const std::vector<std::vector<double>>& windows) {
  std::string out;
  for (const auto& w : windows) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) out += ',';
      out += format_double(w[i]);
    }
    out += '\n';
  }
  write_atomic(path, out);
}

std::vector<std::vector<double>> read_windows_csv(const std::filesystem::path& path) {
  std::stringstream in(read_file(path));
  std::vector<std::vector<double>> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> w;
    for (const auto& cell : split_csv_line(line)) {
      try {
        std::size_t pos = 0;
        w.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw Error(Errc::MalformedRow, path.string() + " row " + std::to_string(row));
      }
    }
    if (!out.empty() && w.size() != out.front().size()) {
      throw Error(Errc::MalformedRow, path.string() + " row " + std::to_string(row) + ": length differs");
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace xirpaug::app
