#include "qolat_cli/emit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "qolat/errors.hpp"
#include "qolat_cli/config.hpp"

namespace qolat::cli {

namespace fs = std::filesystem;

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw std::logic_error("CSV row width does not match header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  for (std::size_t c = 0; c < header_.size(); ++c) {
    if (c) out += ',';
    out += header_[c];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (const double* d = std::get_if<double>(&row[c])) {
        if (std::isnan(*d)) throw NumericError("NaN in output column '" + header_[c] + "'");
        out += format_real(*d);
      } else if (const long long* i = std::get_if<long long>(&row[c])) {
        out += std::to_string(*i);
      } else {
        out += std::get<std::string>(row[c]);
      }
    }
    out += '\n';
  }
  return out;
}

OutputTransaction::OutputTransaction(fs::path directory) : dir_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }
}

OutputTransaction::~OutputTransaction() {
  if (!committed_) discard();
}

void OutputTransaction::stage(const std::string& name, const std::string& content) {
  Staged s{name, dir_ / (name + ".tmp"), dir_ / name};
  files_.push_back(s);
  std::ofstream out(s.temp, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + s.temp.string() + "'");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + s.temp.string() + "'");
}

void OutputTransaction::commit() {
  for (auto& f : files_) {
    std::error_code ec;
    fs::rename(f.temp, f.final_path, ec);
    if (ec) throw IoError("cannot move '" + f.temp.string() + "' into place: " + ec.message());
    f.renamed = true;
  }
  committed_ = true;
}

std::vector<std::string> OutputTransaction::names() const {
  std::vector<std::string> out;
  for (const auto& f : files_) out.push_back(f.name);
  return out;
}

void OutputTransaction::discard() noexcept {
  for (const auto& f : files_) {
    std::error_code ec;
    fs::remove(f.temp, ec);
    if (f.renamed) fs::remove(f.final_path, ec);
  }
}

}  // namespace qolat::cli
