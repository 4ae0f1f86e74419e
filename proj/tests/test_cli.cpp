#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include <stickyss/config.hpp>

namespace fs = std::filesystem;
using namespace stickyss;

namespace {

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::path(::testing::TempDir()) / ("stickyss_cli_" + name);
  fs::remove_all(d);
  return d;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    exe_ = env("STICKYSS_CLI");
    configs_ = env("STICKYSS_CONFIGS");
    if (exe_.empty() || configs_.empty()) GTEST_SKIP() << "STICKYSS_CLI and STICKYSS_CONFIGS not set";
  }

  int run(const std::string& args, const fs::path& out) {
    std::string cmd = exe_ + " " + args + " --out " + out.string() + " > " + (out.string() + ".log") + " 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string config(const std::string& name) const { return (fs::path(configs_) / name).string(); }

  std::string exe_, configs_;
};

}  // namespace

TEST(GitBlobHash, MatchesGit) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Config, ParsesTypedValues) {
  Config c = Config::parse("[s]\nx = 1.5\nn = 12\nlist = 0.2, 0.1 ,0.05\nflag = yes\nname = muscl \n");
  EXPECT_EQ(c.real("s", "x"), 1.5);
  EXPECT_EQ(c.integer("s", "n"), 12);
  EXPECT_EQ(c.reals("s", "list"), (std::vector<double>{0.2, 0.1, 0.05}));
  EXPECT_TRUE(c.boolean("s", "flag", false));
  EXPECT_EQ(c.text("s", "name"), "muscl");
  EXPECT_EQ(c.real("s", "absent", 7.0), 7.0);
  EXPECT_TRUE(c.has_section("s"));
  EXPECT_FALSE(c.has_section("t"));
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(Config::parse("[s\nx = 1\n"), ConfigError);
  Config c = Config::parse("[s]\nx = 1.5abc\nn = 2.5\nflag = maybe\n");
  EXPECT_THROW(c.real("s", "x"), ConfigError);
  EXPECT_THROW(c.integer("s", "n"), ConfigError);
  EXPECT_THROW(c.boolean("s", "flag", true), ConfigError);
  EXPECT_THROW(c.real("s", "missing"), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/stickyss.cfg"), ConfigError);
}

TEST(Config, SolverSectionIsValidated) {
  Config ok = Config::parse("[solver]\ngamma = 0.1\nc = 0.25\nL = 10\nN = 128\nsmoothing_time = 3\n");
  SolverConfig cfg = solver_config(ok);
  EXPECT_EQ(cfg.cell_count, 128);
  EXPECT_EQ(cfg.smoothing_time, 3.0);
  EXPECT_EQ(cfg.drift, DriftScheme::muscl);
  EXPECT_THROW(solver_config(Config::parse("[solver]\ngamma = 0.1\nc = 0.25\nL = 10\n")), ConfigError);
  EXPECT_THROW(solver_config(Config::parse("[solver]\ngamma = 1.2\nc = 0.25\nL = 10\nN = 128\n")), ConfigError);
  EXPECT_THROW(solver_config(Config::parse("[solver]\ngamma = 0.1\nc = 0.25\nL = 10\nN = 128\ndrift = weno\n")),
               ConfigError);
  EXPECT_THROW(solver_config(Config::parse("[other]\nx = 1\n")), ConfigError);
}

TEST_F(Cli, MissingConfigFileIsAConfigError) {
  fs::path out = fresh_dir("missing");
  EXPECT_EQ(run("steady --config /nonexistent/stickyss.cfg", out), 2);
  EXPECT_NE(slurp(out.string() + ".log").find("config error"), std::string::npos);
}

TEST_F(Cli, BadArgumentsAreConfigErrors) {
  fs::path out = fresh_dir("args");
  EXPECT_EQ(run("steady", out), 2);
  EXPECT_EQ(run("maxwell --config " + config("k25.cfg") + " --format xml", out), 2);
  EXPECT_EQ(run("maxwell --config " + config("k25.cfg") + " --threads 0", out), 2);
  EXPECT_EQ(run("nosuch --config " + config("k25.cfg"), out), 2);
}

TEST_F(Cli, MissingKeyIsAConfigError) {
  fs::path dir = fresh_dir("missing_key");
  fs::create_directories(dir);
  fs::path cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "[maxwell]\nxi_min = 1e-6\nxi_max = 32\nk = 2.5\nlambda = 1\nT = 5\ninit = gaussian\n";
  EXPECT_EQ(run("maxwell --config " + cfg.string(), dir / "out"), 2);
  EXPECT_NE(slurp((dir / "out").string() + ".log").find("per_octave"), std::string::npos);
  EXPECT_EQ(run("steady --config " + cfg.string(), dir / "out2"), 2);
}

TEST_F(Cli, MaxwellWritesDecayAndReport) {
  fs::path out = fresh_dir("maxwell");
  ASSERT_EQ(run("maxwell --config " + config("k25.cfg"), out), 0);
  std::string decay = slurp(out / "decay.csv");
  EXPECT_EQ(decay.substr(0, 11), "t,distance\n");
  json report = json::parse(slurp(out / "report.json"));
  EXPECT_TRUE(report["pass"].get<bool>());
  EXPECT_GE(report["fitted_rate"].get<double>(), 0.9 * report["sigma_k"].get<double>());
  json manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "maxwell");
  EXPECT_EQ(manifest["exit_code"], 0);
  EXPECT_EQ(manifest["version"], "0.1.0");
  EXPECT_EQ(manifest["config_hash"], git_blob_hash(slurp(config("k25.cfg"))));
  EXPECT_EQ(manifest["files"], (json{"decay.csv", "report.json"}));
}

TEST_F(Cli, EnergyGrowthExitsNotConverged) {
  fs::path out = fresh_dir("growth");
  EXPECT_EQ(run("steady --config " + config("growth.cfg"), out), 3);
  json j = json::parse(slurp(out / "steady.json"));
  EXPECT_FALSE(j["converged"].get<bool>());
  EXPECT_EQ(json::parse(slurp(out / "manifest.json"))["exit_code"], 3);
}

TEST_F(Cli, SteadyRunPassesItsAudit) {
  fs::path out = fresh_dir("steady");
  ASSERT_EQ(run("steady --config " + config("smoke.cfg") + " --threads 2", out), 0);
  for (const char* f : {"profile.csv", "residual.csv", "steady.json", "manifest.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  json j = json::parse(slurp(out / "steady.json"));
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_EQ(json::parse(slurp(out / "manifest.json"))["threads"], 2);
}

TEST_F(Cli, JsonFormatSkipsCsv) {
  fs::path out = fresh_dir("json_only");
  ASSERT_EQ(run("steady --config " + config("smoke.cfg") + " --format json", out), 0);
  EXPECT_FALSE(fs::exists(out / "profile.csv"));
  EXPECT_TRUE(fs::exists(out / "steady.json"));
}

TEST_F(Cli, SweepWritesOneProfilePerGamma) {
  fs::path out = fresh_dir("sweep");
  ASSERT_EQ(run("sweep --config " + config("smoke.cfg"), out), 0);
  json j = json::parse(slurp(out / "sweep.json"));
  ASSERT_EQ(j["entries"].size(), 2u);
  int profiles = 0;
  for (const auto& e : fs::directory_iterator(out)) profiles += e.path().filename().string().rfind("profile_gamma_", 0) == 0;
  EXPECT_EQ(profiles, 2);
}

TEST_F(Cli, UnderResolvedLinearizationFailsItsCheck) {
  fs::path out = fresh_dir("linearize");
  EXPECT_EQ(run("linearize --config " + config("smoke.cfg"), out), 1);
  json j = json::parse(slurp(out / "linearize.json"));
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_GT(j["kernel_residual"].get<double>(), 1e-2);
  EXPECT_TRUE(fs::exists(out / "phi0_residual.csv"));
}

TEST_F(Cli, AuditPassesAndHonoursSeed) {
  fs::path out = fresh_dir("audit");
  ASSERT_EQ(run("audit --config " + config("smoke.cfg") + " --seed 99", out), 0);
  json j = json::parse(slurp(out / "audit.json"));
  EXPECT_EQ(j["seed"], 99);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(json::parse(slurp(out / "manifest.json"))["seed"], 99);
  EXPECT_TRUE(fs::exists(out / "audit.csv"));
}

TEST_F(Cli, OutputsAreByteIdenticalAcrossRuns) {
  fs::path a = fresh_dir("repeat_a"), b = fresh_dir("repeat_b");
  ASSERT_EQ(run("steady --config " + config("smoke.cfg") + " --threads 2", a), 0);
  ASSERT_EQ(run("steady --config " + config("smoke.cfg") + " --threads 2", b), 0);
  for (const char* f : {"profile.csv", "residual.csv", "steady.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
