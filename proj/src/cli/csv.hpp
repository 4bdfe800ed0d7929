// CSV and manifest output with deterministic number formatting.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cavpump::cli {

/// 17 significant digits, locale-independent.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
  void meta(const std::string& key, double value) { meta_.emplace_back(key, format_number(value)); }
  /// Row length must match the header.
  void add_row(const std::vector<double>& row);
  void add_text_row(std::vector<std::string> row);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::string render() const;

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Files staged in memory and published together. Each file is written to a
/// temporary name in the target directory and renamed into place, so a failed
/// run leaves no partial artifacts.
class OutputSet {
 public:
  void add(const std::string& name, std::string content);
  void add(const std::string& name, const CsvTable& table) { add(name, table.render()); }

  const std::map<std::string, std::string>& files() const { return files_; }
  bool contains(const std::string& name) const { return files_.count(name) != 0; }
  const std::string& at(const std::string& name) const { return files_.at(name); }

  /// Writes every staged file into `dir` (created if missing).
  void commit(const std::filesystem::path& dir) const;

 private:
  std::map<std::string, std::string> files_;
};

}  // namespace cavpump::cli
