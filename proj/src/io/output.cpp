#include "cellkit/io/output.hpp"

#include <atomic>
#include <cmath>
#include <fstream>

#include <Eigen/Core>
#include <fmt/format.h>
#include <spdlog/version.h>
#include <unistd.h>

#include "cellkit/errors.hpp"
#include "cellkit/simd/kernels.hpp"

#ifndef CELLKIT_VERSION
#define CELLKIT_VERSION "unknown"
#endif

namespace cellkit::io {

Cell::Cell(double v) : text_(std::isfinite(v) ? fmt::format("{}", v) : (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"))) {}
Cell::Cell(int v) : text_(std::to_string(v)) {}
Cell::Cell(long v) : text_(std::to_string(v)) {}
Cell::Cell(bool v) : text_(v ? "true" : "false") {}
Cell::Cell(const char* v) : text_(v) {}
Cell::Cell(std::string v) : text_(std::move(v)) {}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += ',';
    out += quote(fields[k]);
  }
  out += "\r\n";
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size())
    throw Error(fmt::format("csv row has {} fields, header has {}", row.size(), header_.size()));
  std::vector<std::string> r;
  r.reserve(row.size());
  for (auto& c : row) r.push_back(c.text());
  rows_.push_back(std::move(r));
}

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + fmt::format(".tmp-{}-{}", ::getpid(), counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

void OutputSet::write(const std::string& name, const std::string& content) {
  write_atomic(dir_ / name, content);
  files_.push_back(name);
}

void OutputSet::write_manifest(nlohmann::json fields) {
  fields["versions"] = build_info();
  fields["outputs"] = files_;
  write_atomic(dir_ / "manifest.json", fields.dump(2) + "\n");
}

nlohmann::json build_info() {
  return {
      {"cellkit", CELLKIT_VERSION},
      {"compiler", __VERSION__},
      {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"spdlog", fmt::format("{}.{}.{}", SPDLOG_VER_MAJOR, SPDLOG_VER_MINOR, SPDLOG_VER_PATCH)},
      {"fmt", FMT_VERSION},
      {"json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                           NLOHMANN_JSON_VERSION_PATCH)},
      {"kernels", simd::active().name},
  };
}

}  // namespace cellkit::io
