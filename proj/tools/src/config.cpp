#include "qolat_cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qolat::cli {

namespace {

KeySpec make(std::string section, std::string key, ValueType type, std::string def) {
  KeySpec k;
  k.section = std::move(section);
  k.key = std::move(key);
  k.type = type;
  k.default_value = std::move(def);
  return k;
}

KeySpec integer(std::string section, std::string key, std::string def, double lower, std::string help) {
  KeySpec k = make(std::move(section), std::move(key), ValueType::integer, std::move(def));
  k.lower = lower;
  k.help = std::move(help);
  return k;
}

KeySpec real(std::string section, std::string key, std::string def, std::string help, double lower = -1e308,
             bool open = false, double upper = 1e308) {
  KeySpec k = make(std::move(section), std::move(key), ValueType::real, std::move(def));
  k.lower = lower;
  k.lower_open = open;
  k.upper = upper;
  k.help = std::move(help);
  return k;
}

KeySpec choice(std::string section, std::string key, std::string def, std::vector<std::string> choices,
               std::string help) {
  KeySpec k = make(std::move(section), std::move(key), ValueType::choice, std::move(def));
  k.choices = std::move(choices);
  k.help = std::move(help);
  return k;
}

KeySpec flag(std::string section, std::string key, std::string def, std::string help) {
  KeySpec k = make(std::move(section), std::move(key), ValueType::boolean, std::move(def));
  k.help = std::move(help);
  return k;
}

KeySpec list(std::string section, std::string key, std::string def, std::string help) {
  KeySpec k = make(std::move(section), std::move(key), ValueType::real_list, std::move(def));
  k.lower = 0.0;
  k.help = std::move(help);
  return k;
}

KeySpec text(std::string section, std::string key, std::string def, std::string help) {
  KeySpec k = make(std::move(section), std::move(key), ValueType::text, std::move(def));
  k.help = std::move(help);
  return k;
}

std::vector<KeySpec> build_schema() {
  const double pi = std::numbers::pi;
  return {
      integer("lattice", "sites", "8", 1, "number of lattice sites M"),
      choice("lattice", "boundary", "periodic", {"open", "periodic"}, "chain boundary condition"),
      choice("lattice", "statistics", "fermion", {"fermion", "boson"}, "particle statistics"),
      integer("lattice", "n_up", "4", 0, "spin-up fermions"),
      integer("lattice", "n_down", "4", 0, "spin-down fermions"),
      integer("lattice", "particles", "4", 0, "bosons"),
      integer("lattice", "n_max", "5", 1, "boson occupation cap per site"),
      real("lattice", "lattice_constant", "1", "lattice spacing a", 0.0, true),
      real("lattice", "t0", "1", "hopping amplitude"),
      real("lattice", "U", "0", "on-site interaction"),
      choice("lattice", "solver", "auto", {"auto", "dense", "lanczos", "imaginary_time"}, "ground-state solver"),
      flag("lattice", "manifold", "true", "average over the degenerate ground manifold"),

      real("scatter", "theta_in", "0", "probe incidence angle (rad)", -pi, false, pi),
      real("scatter", "wavelength", "2", "probe wavelength in units of a", 0.0, true),
      integer("scatter", "angles", "361", 2, "detection angles on [-pi, pi]"),

      choice("trajectory", "prior", "ground", {"ground", "flat"}, "initial eigenvalue distribution"),
      integer("trajectory", "flat_range", "4", 0, "flat prior support is [-range, range]"),
      integer("trajectory", "illuminated", "0", 0, "illuminated sites K (0 = all)"),
      choice("trajectory", "channel", "auto",
             {"auto", "magnetization", "density", "spin_up", "spin_down", "boson"},
             "measured site quantity (auto: magnetization for fermions, density for bosons)"),
      choice("trajectory", "pattern", "maximum", {"maximum", "minimum"}, "diffraction pattern sampled"),
      real("trajectory", "coupling", "1", "|C|", 0.0),
      real("trajectory", "kappa", "1", "cavity decay rate", 0.0, true),
      real("trajectory", "duration", "1", "trajectory length", 0.0),
      integer("trajectory", "trajectories", "10000", 1, "ensemble size"),
      list("trajectory", "snapshots", "0.25,0.5,1", "snapshot times"),
      integer("trajectory", "log_trajectories", "20", 0, "trajectories written to the per-trajectory logs"),

      real("homodyne", "flux", "1", "local-oscillator flux F", 0.0, true),
      real("homodyne", "delta_phi", "1.5707963267948966", "phase difference phi_C - theta (rad)"),
      real("homodyne", "kappa", "1", "cavity decay rate", 0.0, true),
      real("homodyne", "coupling", "1", "|C|", 0.0, true),
      real("homodyne", "phi", "0", "branch phase rate"),
      real("homodyne", "omega_p", "0", "probe frequency (global phase only)"),
      real("homodyne", "rate", "1.0025", "detection rate m/t defining the prepared pair", 0.0),
      real("homodyne", "duration", "10", "trajectory length", 0.0),
      integer("homodyne", "trajectories", "100", 1, "ensemble size"),
      real("homodyne", "miss_probability", "0.5", "detector miss probability eta", 0.0, false, 0.999999),
      integer("homodyne", "mean_counts", "10", 0, "true detections for the robustness comparison"),
      integer("homodyne", "samples", "10000", 1, "Monte Carlo samples for the robustness comparison"),
      integer("homodyne", "query_counts", "-1", -1, "m for an eigenvalue query (-1 = none)"),
      real("homodyne", "query_time", "1", "t for an eigenvalue query", 0.0, true),

      choice("entropy", "prior", "poisson", {"poisson", "skellam", "binomial"}, "count distribution family"),
      real("entropy", "mean", "50", "mean count <N>", 0.0),
      integer("entropy", "trials", "100", 0, "binomial trials"),
      real("entropy", "p", "0.5", "binomial success probability", 0.0, false, 1.0),
      integer("entropy", "counts", "0", 0, "photocounts m"),
      real("entropy", "tau_max", "0.05", "largest scaled time", 0.0),
      integer("entropy", "tau_points", "51", 1, "scaled-time grid points"),
      real("entropy", "coupling", "1", "|C| for alpha_z = C z", 0.0),
      choice("entropy", "base", "2", {"2", "e"}, "logarithm base"),

      real("meanfield", "mu_min", "0", "smallest mu/U"),
      real("meanfield", "mu_max", "3", "largest mu/U"),
      real("meanfield", "mu_step", "0.005", "mu/U step", 0.0, true),
      real("meanfield", "alpha_min", "0.001", "smallest alpha_D", 0.0, true),
      real("meanfield", "alpha_max", "10", "largest alpha_D", 0.0, true),
      integer("meanfield", "alpha_points", "41", 1, "log-spaced alpha_D points"),
      integer("meanfield", "K", "1", 1, "illuminated sites"),
      integer("meanfield", "n_max", "5", 1, "occupation cap per site"),
      real("meanfield", "t0", "0", "hopping t0/U", 0.0),
      choice("meanfield", "method", "analytic", {"analytic", "selfconsistent"}, "solution route"),

      text("run", "out", ".", "output directory"),
      integer("run", "seed", "-1", -1, "master seed (-1 = unset)"),
      integer("run", "threads", "1", 1, "worker threads"),
  };
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string where_suffix(const Location& where) { return " (" + where.describe() + ")"; }

std::optional<long long> parse_integer(const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) return std::nullopt;
  return out;
}

std::optional<double> parse_real(const std::string& v) {
  if (v.empty()) return std::nullopt;
  std::istringstream is(v);
  is.imbue(std::locale::classic());
  double out = 0.0;
  is >> out;
  if (!is || !is.eof() || !std::isfinite(out)) return std::nullopt;
  return out;
}

std::optional<bool> parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  return std::nullopt;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  return out;
}

void check_range(const KeySpec& spec, double x, const Location& where) {
  const bool low = spec.lower_open ? !(x > spec.lower) : !(x >= spec.lower);
  if (low || x > spec.upper) {
    std::ostringstream msg;
    msg << spec.dotted() << " = " << x << " is out of range: must be " << (spec.lower_open ? "> " : ">= ")
        << spec.lower;
    if (spec.upper < 1e308) msg << " and <= " << spec.upper;
    throw ConfigError(msg.str() + where_suffix(where));
  }
}

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = build_schema();
  return keys;
}

const KeySpec* find_key(std::string_view section, std::string_view key) {
  for (const auto& k : schema()) {
    if (k.section == section && k.key == key) return &k;
  }
  return nullptr;
}

bool known_section(std::string_view section) {
  return std::any_of(schema().begin(), schema().end(), [&](const KeySpec& k) { return k.section == section; });
}

std::string Location::describe() const {
  if (line == 0) return source;
  return source + ":" + std::to_string(line);
}

void check_value(const KeySpec& spec, const std::string& value, const Location& where) {
  switch (spec.type) {
    case ValueType::integer: {
      auto v = parse_integer(value);
      if (!v) throw ConfigError(spec.dotted() + ": expected an integer, got '" + value + "'" + where_suffix(where));
      check_range(spec, static_cast<double>(*v), where);
      break;
    }
    case ValueType::real: {
      auto v = parse_real(value);
      if (!v) throw ConfigError(spec.dotted() + ": expected a number, got '" + value + "'" + where_suffix(where));
      check_range(spec, *v, where);
      break;
    }
    case ValueType::boolean:
      if (!parse_bool(value)) {
        throw ConfigError(spec.dotted() + ": expected true or false, got '" + value + "'" + where_suffix(where));
      }
      break;
    case ValueType::choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string allowed;
        for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : ", ") + c;
        throw ConfigError(spec.dotted() + ": '" + value + "' is not one of {" + allowed + "}" + where_suffix(where));
      }
      break;
    case ValueType::real_list:
      if (!value.empty()) {
        for (const auto& item : split_list(value)) {
          auto v = parse_real(item);
          if (!v) {
            throw ConfigError(spec.dotted() + ": expected a comma-separated list of numbers, got '" + value + "'" +
                              where_suffix(where));
          }
          check_range(spec, *v, where);
        }
      }
      break;
    case ValueType::text:
      break;
  }
}

void Config::set_from_file(const std::string& section, const std::string& key, std::string value, Location where) {
  const KeySpec* spec = find_key(section, key);
  if (!spec) throw ConfigError("unknown key '" + section + "." + key + "'" + where_suffix(where));
  check_value(*spec, value, where);
  const std::string dotted = spec->dotted();
  if (auto it = values_.find(dotted); it != values_.end()) {
    throw ConfigError("duplicate key '" + dotted + "' at " + where.describe() + ", first defined at " +
                      it->second.where.describe());
  }
  values_.emplace(dotted, Entry{std::move(value), std::move(where)});
}

void Config::override_value(const std::string& dotted, std::string value) {
  const auto& spec = spec_of(dotted);
  Location where{"command line --" + dotted, 0};
  check_value(spec, value, where);
  values_[dotted] = Entry{std::move(value), std::move(where)};
}

const KeySpec& Config::spec_of(std::string_view dotted) const {
  const auto dot = dotted.find('.');
  const KeySpec* spec =
      dot == std::string_view::npos ? nullptr : find_key(dotted.substr(0, dot), dotted.substr(dot + 1));
  if (!spec) throw ConfigError("unknown key '" + std::string(dotted) + "'");
  return *spec;
}

bool Config::has(std::string_view dotted) const { return values_.find(dotted) != values_.end(); }

const Entry* Config::entry(std::string_view dotted) const {
  auto it = values_.find(dotted);
  return it == values_.end() ? nullptr : &it->second;
}

std::string Config::raw(std::string_view dotted, Location* where) const {
  const auto& spec = spec_of(dotted);
  if (auto it = values_.find(dotted); it != values_.end()) {
    if (where) *where = it->second.where;
    return it->second.value;
  }
  if (where) *where = Location{"default", 0};
  return spec.default_value;
}

long long Config::integer(std::string_view dotted) const { return *parse_integer(raw(dotted, nullptr)); }

double Config::real(std::string_view dotted) const { return *parse_real(raw(dotted, nullptr)); }

bool Config::boolean(std::string_view dotted) const { return *parse_bool(raw(dotted, nullptr)); }

std::string Config::text(std::string_view dotted) const { return raw(dotted, nullptr); }

std::vector<double> Config::real_list(std::string_view dotted) const {
  std::vector<double> out;
  const auto v = raw(dotted, nullptr);
  if (v.empty()) return out;
  for (const auto& item : split_list(v)) out.push_back(*parse_real(item));
  return out;
}

std::vector<std::string> Config::sections_in_use() const {
  std::vector<std::string> out;
  for (const auto& [dotted, e] : values_) {
    auto s = dotted.substr(0, dotted.find('.'));
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

std::map<std::string, std::string> Config::resolved() const {
  std::map<std::string, std::string> out;
  for (const auto& k : schema()) out[k.dotted()] = raw(k.dotted(), nullptr);
  return out;
}

Config parse_config_text(std::string_view text, const std::string& source) {
  Config cfg;
  std::string section;
  std::istringstream is{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const Location where{source, number};
    if (auto mark = line.find_first_of("#;"); mark != std::string::npos) line.erase(mark);
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header" + where_suffix(where));
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!known_section(section)) throw ConfigError("unknown section [" + section + "]" + where_suffix(where));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'" + where_suffix(where));
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' appears before any [section]" + where_suffix(where));
    if (key.empty()) throw ConfigError("missing key name" + where_suffix(where));
    cfg.set_from_file(section, key, value, where);
  }
  return cfg;
}

Config parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace qolat::cli
