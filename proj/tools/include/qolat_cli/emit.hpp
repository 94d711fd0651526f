#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace qolat::cli {

inline constexpr int kSchemaVersion = 1;

// 17 significant digits, enough to round-trip a double.
std::string format_real(double x);

class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<Cell> row);
  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<std::string>& header() const noexcept { return header_; }

  // Throws qolat::NumericError if any cell is NaN.
  std::string render() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// Files are staged under temporary names and renamed on commit. If the
// transaction is destroyed uncommitted, every file it touched is removed.
class OutputTransaction {
 public:
  explicit OutputTransaction(std::filesystem::path directory);
  ~OutputTransaction();
  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;

  void stage(const std::string& name, const std::string& content);
  void commit();

  const std::filesystem::path& directory() const noexcept { return dir_; }
  std::vector<std::string> names() const;

 private:
  struct Staged {
    std::string name;
    std::filesystem::path temp;
    std::filesystem::path final_path;
    bool renamed = false;
  };
  void discard() noexcept;

  std::filesystem::path dir_;
  std::vector<Staged> files_;
  bool committed_ = false;
};

}  // namespace qolat::cli
