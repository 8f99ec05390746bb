// Drives the built adammcmc binary; skipped when the tool is not built.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

#ifdef ADAMMCMC_CLI_PATH

namespace {

const fs::path kRoot = fs::current_path() / "cli_test_out";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" ADAMMCMC_CLI_PATH "\" " + args + " >" +
                          (kRoot / "last_stdout.txt").string() + " 2>" +
                          (kRoot / "last_stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path write_config(const std::string& name, const std::string& json) {
  const fs::path p = kRoot / name;
  std::ofstream(p) << json;
  return p;
}

const char* kQuadratic = R"({"target": "quadratic", "dim": 2, "sigma": 0.5,
  "steps": 3000, "burn_in": 1000, "gap": 200, "n_samples": 10})";

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
  }
};

}  // namespace

TEST_F(Cli, RunWritesArtifactsDeterministically) {
  const fs::path cfg = write_config("quad.json", kQuadratic);
  const fs::path a = kRoot / "run_a", b = kRoot / "run_b";
  ASSERT_EQ(run("run --config " + cfg.string() + " --out " + a.string()), 0);
  ASSERT_EQ(run("run --config " + cfg.string() + " --out " + b.string()), 0);
  for (const char* f : {"config.json", "chain_record.csv", "samples.csv", "samples.json",
                        "ensemble_summary.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_EQ(slurp(a / "chain_record.csv"), slurp(b / "chain_record.csv"));
  EXPECT_EQ(slurp(a / "samples.csv"), slurp(b / "samples.csv"));
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  EXPECT_NE(slurp(a / "manifest.json").find("config_hash"), std::string::npos);
}

TEST_F(Cli, SeedFlagChangesChain) {
  const fs::path cfg = write_config("quad_seed.json", kQuadratic);
  ASSERT_EQ(run("run --config " + cfg.string() + " --seed 1 --out " + (kRoot / "s1").string()), 0);
  ASSERT_EQ(run("run --config " + cfg.string() + " --seed 2 --out " + (kRoot / "s2").string()), 0);
  EXPECT_NE(slurp(kRoot / "s1" / "chain_record.csv"), slurp(kRoot / "s2" / "chain_record.csv"));
}

TEST_F(Cli, BadSigmaExitsTwoNamingField) {
  const fs::path cfg = write_config("bad.json", R"({"sigma": -1})");
  EXPECT_EQ(run("run --config " + cfg.string()), 2);
  EXPECT_NE(slurp(kRoot / "last_stderr.txt").find("sigma"), std::string::npos);
}

TEST_F(Cli, UnknownKeyExitsTwo) {
  const fs::path cfg = write_config("unknown.json", R"({"colour": 1})");
  EXPECT_EQ(run("run --config " + cfg.string()), 2);
}

TEST_F(Cli, MissingConfigFileExitsTwo) {
  EXPECT_EQ(run("run --config " + (kRoot / "nope.json").string()), 2);
}

TEST_F(Cli, NumericalAbortExitsThree) {
  const fs::path cfg = write_config("diverge.json", R"({"target": "banana", "sampler": "sgd",
    "gamma": 1.0, "init_offset": 3.0, "steps": 100, "burn_in": 0, "gap": 1, "n_samples": 100})");
  EXPECT_EQ(run("run --config " + cfg.string() + " --out " + (kRoot / "diverge").string()), 3);
}

TEST_F(Cli, ScanWritesGridTimesSeedsRows) {
  const fs::path cfg = write_config("scan.json", kQuadratic);
  const fs::path out = kRoot / "scan";
  ASSERT_EQ(run("scan --config " + cfg.string() + " --param sigma --grid 0.2,0.5,1.5 " +
                "--replicates 2 --jobs 2 --out " + out.string()),
            0);
  std::istringstream table(slurp(out / "scan.csv"));
  std::string line;
  int rows = -1;  // header
  while (std::getline(table, line)) ++rows;
  EXPECT_EQ(rows, 6);
  EXPECT_TRUE(fs::exists(out / "scan_long.csv"));
}

TEST_F(Cli, ScanUnknownParamExitsTwo) {
  const fs::path cfg = write_config("scan_bad.json", kQuadratic);
  EXPECT_EQ(run("scan --config " + cfg.string() + " --param gamma --grid 0.1"), 2);
}

TEST_F(Cli, ScanEmptyGridExitsTwo) {
  const fs::path cfg = write_config("scan_empty.json", kQuadratic);
  EXPECT_EQ(run("scan --config " + cfg.string() + " --param sigma --grid ,"), 2);
  EXPECT_EQ(run("scan --config " + cfg.string() + " --param sigma --grid abc"), 2);
}

TEST_F(Cli, CompareMhWritesComparison) {
  const fs::path cfg = write_config("mh.json", R"({"target": "mlp", "hidden": [4], "n_train": 100,
    "n_test": 50, "sigma": 0.05, "batch_size": 25, "steps": 300, "burn_in": 100, "gap": 10,
    "n_samples": 10})");
  const fs::path out = kRoot / "mh";
  ASSERT_EQ(run("compare-mh --config " + cfg.string() + " --out " + out.string()), 0);
  for (const char* f : {"stochastic_record.csv", "full_record.csv", "full_data_loss.csv",
                        "comparison.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
}

TEST_F(Cli, CompareMhWithoutBatchesExitsTwo) {
  const fs::path cfg = write_config("mh_bad.json", kQuadratic);
  EXPECT_EQ(run("compare-mh --config " + cfg.string()), 2);
}

TEST_F(Cli, OutputRootEnvironmentVariable) {
  const fs::path cfg = write_config("quad_env.json", kQuadratic);
  const fs::path root = kRoot / "env_root";
  ASSERT_EQ(run("run --config " + cfg.string() + " --out rel_dir",
                "ADAMMCMC_OUT_ROOT=" + root.string()),
            0);
  EXPECT_TRUE(fs::exists(root / "rel_dir" / "chain_record.csv"));
}

TEST_F(Cli, VerifyQuickPasses) {
  EXPECT_EQ(run("verify --quick"), 0);
  const std::string out = slurp(kRoot / "last_stdout.txt");
  EXPECT_NE(out.find("[PASS] 1 "), std::string::npos);
  EXPECT_EQ(out.find("[FAIL]"), std::string::npos);
}

TEST_F(Cli, MissingSubcommandExitsTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, HelpExitsZero) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("scan --help"), 0);
}

#else

TEST(Cli, NotBuilt) { GTEST_SKIP() << "command-line tool not built"; }

#endif
