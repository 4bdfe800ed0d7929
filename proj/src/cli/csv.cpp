#include "cli/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace cavpump::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size()) throw std::logic_error("CSV row length does not match the header");
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (double v : row) cells.push_back(format_number(v));
  rows_.push_back(std::move(cells));
}

void CsvTable::add_text_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::logic_error("CSV row length does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  for (const auto& [k, v] : meta_) out += "# " + k + ": " + v + "\n";
  for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
  out += "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void OutputSet::add(const std::string& name, std::string content) {
  if (name.empty() || name.find('/') != std::string::npos) throw std::logic_error("invalid output name '" + name + "'");
  files_[name] = std::move(content);
}

void OutputSet::commit(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged;
  try {
    for (const auto& [name, content] : files_) {
      const auto target = dir / name;
      auto temp = target;
      temp += ".tmp";
      std::ofstream out(temp, std::ios::binary | std::ios::trunc);
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.close();
      staged.emplace_back(temp, target);
      if (!out) throw std::runtime_error("failed to write '" + temp.string() + "'");
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& [temp, target] : staged) std::filesystem::remove(temp, ec);
    throw;
  }
  for (const auto& [temp, target] : staged) std::filesystem::rename(temp, target);
}

}  // namespace cavpump::cli
