#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qolat::cli {

// Bad configuration: exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable input or unwritable output: exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueType { integer, real, boolean, text, choice, real_list };

struct KeySpec {
  std::string section;
  std::string key;
  ValueType type = ValueType::real;
  std::string default_value;
  std::vector<std::string> choices;
  double lower = -1e308;
  double upper = 1e308;
  bool lower_open = false;
  std::string help;

  std::string dotted() const { return section + "." + key; }
};

const std::vector<KeySpec>& schema();
const KeySpec* find_key(std::string_view section, std::string_view key);
bool known_section(std::string_view section);

struct Location {
  std::string source;
  int line = 0;  // 0 for command-line values

  std::string describe() const;
};

struct Entry {
  std::string value;
  Location where;
};

class Config {
 public:
  // Adds a value from a config file. Rejects unknown keys and duplicates.
  void set_from_file(const std::string& section, const std::string& key, std::string value, Location where);
  // Command-line values replace file values.
  void override_value(const std::string& dotted, std::string value);

  bool has(std::string_view dotted) const;
  const Entry* entry(std::string_view dotted) const;

  long long integer(std::string_view dotted) const;
  double real(std::string_view dotted) const;
  bool boolean(std::string_view dotted) const;
  std::string text(std::string_view dotted) const;
  std::vector<double> real_list(std::string_view dotted) const;

  // Sections that carry at least one explicit value.
  std::vector<std::string> sections_in_use() const;
  // Every schema key with its resolved value, for metadata.
  std::map<std::string, std::string> resolved() const;

 private:
  const KeySpec& spec_of(std::string_view dotted) const;
  std::string raw(std::string_view dotted, Location* where) const;

  std::map<std::string, Entry, std::less<>> values_;
};

Config parse_config_text(std::string_view text, const std::string& source);
Config parse_config_file(const std::filesystem::path& path);

// Checks that `value` parses as the key's type and lies in range.
void check_value(const KeySpec& spec, const std::string& value, const Location& where);

}  // namespace qolat::cli
