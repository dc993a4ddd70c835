#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace cellkit::io {

/// One CSV field; numbers keep full round-trip precision.
class Cell {
 public:
  Cell(double v);
  Cell(int v);
  Cell(long v);
  Cell(bool v);
  Cell(const char* v);
  Cell(std::string v);
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// Headered table written with RFC 4180 quoting.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes through a temporary file in the same directory and renames it into
/// place, creating parent directories as needed.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Collects the files of one invocation and writes manifest.json last.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);
  const std::filesystem::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content);
  void write(const std::string& name, const CsvTable& table) { write(name, table.str()); }
  void write(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }
  const std::vector<std::string>& files() const { return files_; }

  /// Adds versions, outputs and the given fields, then writes manifest.json.
  void write_manifest(nlohmann::json fields);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

/// Library, compiler and kernel versions for manifests.
nlohmann::json build_info();

}  // namespace cellkit::io
