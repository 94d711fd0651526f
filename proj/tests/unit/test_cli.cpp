#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "qolat/errors.hpp"
#include "qolat_cli/commands.hpp"
#include "qolat_cli/config.hpp"
#include "qolat_cli/emit.hpp"

namespace fs = std::filesystem;
using namespace qolat::cli;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::path(QOLAT_TEST_SCRATCH) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qolat");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t file_count(const fs::path& dir) {
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

const char* kSmallScatter =
    "[lattice]\n"
    "sites = 4\n"
    "n_up = 2\n"
    "n_down = 2\n"
    "U = -4\n"
    "\n"
    "[scatter]\n"
    "angles = 21\n";

}  // namespace

TEST(ConfigParse, MinimalScatterConfig) {
  const auto c = parse_config_text(kSmallScatter, "mem.ini");
  EXPECT_EQ(c.integer("lattice.sites"), 4);
  EXPECT_DOUBLE_EQ(c.real("lattice.U"), -4.0);
  EXPECT_EQ(c.integer("lattice.n_max"), 5);  // default
  EXPECT_EQ(c.text("lattice.boundary"), "periodic");
  const auto used = c.sections_in_use();
  EXPECT_EQ(used, (std::vector<std::string>{"lattice", "scatter"}));
}

TEST(ConfigParse, CommentsAndWhitespace) {
  const auto c = parse_config_text("# header\n[lattice]\n; note\n  sites=6 ; trailing\nU = -1 # six\n", "mem.ini");
  EXPECT_EQ(c.integer("lattice.sites"), 6);
  EXPECT_DOUBLE_EQ(c.real("lattice.U"), -1.0);
}

TEST(ConfigParse, RangeViolationReportsLine) {
  try {
    parse_config_text("[lattice]\nstatistics = boson\nn_max = 0\n", "bad.ini");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.ini:3"), std::string::npos) << e.what();
  }
}

TEST(ConfigParse, TypeMismatchReportsLine) {
  try {
    parse_config_text("[scatter]\n\nangles = many\n", "t.ini");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("t.ini:3"), std::string::npos) << e.what();
  }
}

TEST(ConfigParse, DuplicateKeyNamesBothLocations) {
  try {
    parse_config_text("[lattice]\nsites = 4\n\n[lattice]\nsites = 6\n", "dup.ini");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string w = e.what();
    EXPECT_NE(w.find("dup.ini:2"), std::string::npos) << w;
    EXPECT_NE(w.find("dup.ini:5"), std::string::npos) << w;
  }
}

TEST(ConfigParse, UnknownKeysAndSectionsAreRejected) {
  EXPECT_THROW(parse_config_text("[lattice]\nsitez = 4\n", "u.ini"), ConfigError);
  EXPECT_THROW(parse_config_text("[latice]\nsites = 4\n", "u.ini"), ConfigError);
  EXPECT_THROW(parse_config_text("sites = 4\n", "u.ini"), ConfigError);
  EXPECT_THROW(parse_config_text("[lattice]\nsites 4\n", "u.ini"), ConfigError);
}

TEST(ConfigParse, ChoiceValuesAreChecked) {
  EXPECT_THROW(parse_config_text("[lattice]\nsolver = magic\n", "c.ini"), ConfigError);
  EXPECT_NO_THROW(parse_config_text("[lattice]\nsolver = lanczos\n", "c.ini"));
}

TEST(ConfigParse, OverrideReplacesFileValue) {
  auto c = parse_config_text(kSmallScatter, "mem.ini");
  c.override_value("lattice.U", "2.5");
  EXPECT_DOUBLE_EQ(c.real("lattice.U"), 2.5);
  EXPECT_EQ(c.entry("lattice.U")->where.line, 0);
  EXPECT_THROW(c.override_value("lattice.bogus", "1"), ConfigError);
  EXPECT_THROW(c.override_value("lattice.sites", "-3"), ConfigError);
}

TEST(ConfigParse, MissingFileIsConfigError) {
  EXPECT_THROW(parse_config_file("/nonexistent/qolat.ini"), ConfigError);
}

TEST(RunConfigTest, ForeignSectionIsRejected) {
  auto c = parse_config_text("[meanfield]\nK = 3\n", "f.ini");
  EXPECT_THROW(make_run_config("scatter", c), ConfigError);
  EXPECT_NO_THROW(make_run_config("phasediagram", c));
}

TEST(RunConfigTest, StochasticSubcommandsNeedSeed) {
  EXPECT_THROW(make_run_config("trajectory", Config{}), ConfigError);
  EXPECT_THROW(make_run_config("homodyne", Config{}), ConfigError);
  Config c;
  c.override_value("run.seed", "7");
  const auto rc = make_run_config("trajectory", c);
  ASSERT_TRUE(rc.seed);
  EXPECT_EQ(*rc.seed, 7u);
  EXPECT_TRUE(is_stochastic("homodyne"));
  EXPECT_FALSE(is_stochastic("scatter"));
}

TEST(RunConfigTest, InvalidPhysicsIsConfigError) {
  Config c;
  c.override_value("lattice.sites", "2");
  c.override_value("lattice.n_up", "3");
  EXPECT_THROW(make_run_config("scatter", c), qolat::InvalidArgument);
}

TEST(Emit, FormatsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678}) EXPECT_EQ(std::stod(format_real(x)), x);
}

TEST(Emit, HeaderOnlyTable) {
  CsvTable t({"a", "b"});
  EXPECT_EQ(t.render(), "a,b\n");
}

TEST(Emit, NaNAbortsRender) {
  CsvTable t({"a"});
  t.add_row({std::numeric_limits<double>::quiet_NaN()});
  EXPECT_THROW(t.render(), qolat::NumericError);
}

TEST(Emit, UncommittedTransactionLeavesNothing) {
  const auto dir = scratch("tx");
  {
    OutputTransaction tx(dir);
    tx.stage("a.csv", "x\n");
    tx.stage("b.csv", "y\n");
  }
  EXPECT_EQ(file_count(dir), 0u);
  {
    OutputTransaction tx(dir);
    tx.stage("a.csv", "x\n");
    tx.commit();
  }
  EXPECT_EQ(slurp(dir / "a.csv"), "x\n");
  EXPECT_EQ(file_count(dir), 1u);
}

TEST(Cli, ScatterRunIsByteIdentical) {
  const auto dir = scratch("scatter");
  write(dir / "s.ini", kSmallScatter);
  const auto a = dir / "a", b = dir / "b";
  ASSERT_EQ(run({"scatter", "--config", (dir / "s.ini").string(), "--out", a.string()}).code, kExitOk);
  ASSERT_EQ(run({"scatter", "--config", (dir / "s.ini").string(), "--out", b.string(), "--threads", "3"}).code,
            kExitOk);
  for (const char* f : {"scatter.csv", "scatter_summary.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "scatter.meta.json"));
  const auto csv = slurp(a / "scatter.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("theta_out"), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 22);
}

TEST(Cli, BosonScatterHasNoYColumns) {
  const auto dir = scratch("boson");
  const auto r = run({"scatter", "--lattice.statistics", "boson", "--lattice.sites", "3", "--lattice.particles", "3",
                      "--scatter.angles", "5", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto csv = slurp(dir / "scatter.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("_y"), std::string::npos);
}

TEST(Cli, TrajectorySummaryDeterministic) {
  const auto dir = scratch("traj");
  std::vector<std::string> common{"trajectory",  "--lattice.sites", "4", "--lattice.n_up",
                                  "2",           "--lattice.n_down", "2", "--trajectory.trajectories",
                                  "10000",       "--trajectory.coupling", "0.3", "--seed", "42"};
  auto a = common, b = common;
  a.insert(a.end(), {"--out", (dir / "a").string()});
  b.insert(b.end(), {"--out", (dir / "b").string(), "--threads", "2"});
  ASSERT_EQ(run(a).code, kExitOk);
  ASSERT_EQ(run(b).code, kExitOk);
  for (const char* f : {"trajectory_summary.json", "trajectory_log.csv", "trajectory_distribution.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  const auto meta = slurp(dir / "a" / "trajectory.meta.json");
  EXPECT_NE(meta.find("\"seed\": 42"), std::string::npos) << meta;
}

TEST(Cli, MissingSeedExitsWithConfigCode) {
  const auto dir = scratch("noseed");
  const auto r = run({"homodyne", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_EQ(file_count(dir), 0u);
}

TEST(Cli, RegimeErrorExitsWithNumericCode) {
  const auto dir = scratch("regime");
  const auto r = run({"homodyne", "--seed", "1", "--homodyne.delta_phi", "1.5707963267948966",
                      "--homodyne.query_counts", "1", "--homodyne.query_time", "10", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitNumeric) << r.err;
  EXPECT_NE(r.err.find("invalid detection-rate regime"), std::string::npos) << r.err;
  EXPECT_EQ(file_count(dir), 0u);
}

TEST(Cli, UnwritableOutputExitsWithIoCode) {
  const auto dir = scratch("io");
  write(dir / "blocker", "not a directory\n");
  const auto r = run({"entropy", "--out", (dir / "blocker" / "sub").string()});
  EXPECT_EQ(r.code, kExitIo) << r.err;
}

TEST(Cli, BadConfigFileExitsWithConfigCode) {
  const auto dir = scratch("badcfg");
  write(dir / "bad.ini", "[lattice]\nstatistics = boson\nn_max = 0\n");
  const auto r = run({"scatter", "--config", (dir / "bad.ini").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("bad.ini:3"), std::string::npos) << r.err;
  EXPECT_EQ(run({"scatter", "--no-such-flag"}).code, kExitConfig);
}

TEST(Cli, EntropyAndPhaseDiagramOutputs) {
  const auto dir = scratch("misc");
  ASSERT_EQ(run({"entropy", "--entropy.tau_points", "5", "--out", dir.string()}).code, kExitOk);
  const auto ent = slurp(dir / "entropy.csv");
  EXPECT_EQ(ent.substr(0, ent.find('\n')), "tau,entropy_exact,entropy_approx");
  ASSERT_EQ(run({"phasediagram", "--meanfield.alpha_points", "3", "--meanfield.mu_step", "0.05", "--out",
                 dir.string()})
                .code,
            kExitOk);
  const auto pd = slurp(dir / "phasediagram.csv");
  EXPECT_EQ(pd.substr(0, pd.find('\n')), "mu_over_U,alpha_D,psi,rho,delta_n,phase");
  EXPECT_TRUE(fs::exists(dir / "phasediagram_boundaries.csv"));
}
