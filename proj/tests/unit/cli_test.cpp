#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "treeopt/bench.hpp"
#include "treeopt/io.hpp"

#ifdef TREEOPT_CLI_PATH

namespace treeopt {
namespace {

namespace fs = std::filesystem;
using namespace testing;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("treeopt_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of `treeopt <args>`; stdout and stderr go to files.
  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + TREEOPT_CLI_PATH + "\" " + args + " > \"" + (dir_ / "out").string() +
                            "\" 2> \"" + (dir_ / "err").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string out() const { return read(dir_ / "out"); }
  std::string err() const { return read(dir_ / "err"); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, GenerateTriangleVertexCover) {
  ASSERT_EQ(run("gen vertex-cover --graph complete:3 -o " + path("tri.json")), 0) << err();
  const Ensemble e = load_ensemble(path("tri.json"));
  EXPECT_EQ(e.size(), 6u);
  ASSERT_EQ(run("optimize " + path("tri.json") + " -m brute-force -o " + path("r.json")), 0) << err();
  const auto doc = nlohmann::json::parse(read(path("r.json")));
  EXPECT_EQ(doc["objective"], -2.0);
}

TEST_F(Cli, EdgeListInput) {
  std::ofstream(path("g.txt")) << "1 2\n2 3\n";
  ASSERT_EQ(run("gen vertex-cover --edges " + path("g.txt") + " -o " + path("p3.json")), 0) << err();
  ASSERT_EQ(run("optimize " + path("p3.json") + " -o " + path("r.json")), 0) << err();
  EXPECT_EQ(nlohmann::json::parse(read(path("r.json")))["objective"], -1.0);
}

TEST_F(Cli, SameSeedSameBytes) {
  ASSERT_EQ(run("gen random --seed 7 --trees 6 -o " + path("a.json")), 0);
  ASSERT_EQ(run("gen random --seed 7 --trees 6 -o " + path("b.json")), 0);
  ASSERT_EQ(run("gen random --seed 8 --trees 6 -o " + path("c.json")), 0);
  EXPECT_EQ(read(path("a.json")), read(path("b.json")));
  EXPECT_NE(read(path("a.json")), read(path("c.json")));
}

TEST_F(Cli, ExactMethodsAgree) {
  ASSERT_EQ(run("gen random --seed 3 --trees 8 --vars 5 -o " + path("e.json")), 0);
  const double z = exhaustive_max(load_ensemble(path("e.json"))).best;
  for (const char* m : {"direct", "std-lin", "benders", "splitgen", "splitgen-iter", "brute-force"}) {
    ASSERT_EQ(run("optimize " + path("e.json") + " -m " + m + " -o " + path("r.json")), 0) << m << err();
    const auto doc = nlohmann::json::parse(read(path("r.json")));
    EXPECT_EQ(doc["status"], "optimal") << m;
    EXPECT_NEAR(doc["objective"].get<double>(), z, 1e-6) << m;
  }
  ASSERT_EQ(run("optimize " + path("e.json") + " -m local-search -o " + path("r.json")), 0);
  EXPECT_EQ(nlohmann::json::parse(read(path("r.json")))["status"], "heuristic");
}

TEST_F(Cli, TruncatedPrintsBounds) {
  ASSERT_EQ(run("gen random --seed 4 --depth 3 -o " + path("e.json")), 0);
  ASSERT_EQ(run("optimize " + path("e.json") + " -m truncated --depth 1"), 0) << err();
  const std::string text = out();
  EXPECT_NE(text.find("UB:"), std::string::npos);
  EXPECT_NE(text.find("actual:"), std::string::npos);
  EXPECT_NE(text.find("LB:"), std::string::npos);
  EXPECT_NE(run("optimize " + path("e.json") + " -m truncated"), 0);
}

TEST_F(Cli, BenchOnEmptyDirectory) {
  fs::create_directories(dir_ / "empty");
  ASSERT_EQ(run("bench " + path("empty") + " --csv " + path("b.csv")), 0) << err();
  EXPECT_EQ(read(path("b.csv")), std::string(kBenchCsvHeader) + "\n");
  EXPECT_TRUE(fs::exists(path("b.csv.json")));
}

TEST_F(Cli, BenchInjectedFaultFails) {
  fs::create_directories(dir_ / "suite");
  ASSERT_EQ(run("gen random --seed 1 -o " + path("suite/a.json")), 0);
  ASSERT_EQ(run("bench " + path("suite") + " --methods direct,benders --csv " + path("ok.csv")), 0) << err();
  EXPECT_NE(run("bench " + path("suite") + " --methods direct,benders --inject-fault --csv " + path("bad.csv")), 0);
}

TEST_F(Cli, ValidateAndErrors) {
  ASSERT_EQ(run("validate " + std::string(TREEOPT_TEST_DATA_DIR) + "/valid_small.json"), 0);
  EXPECT_EQ(out().rfind("ok:", 0), 0u);
  EXPECT_EQ(run("validate " + std::string(TREEOPT_TEST_DATA_DIR) + "/malformed/no_trees.json"), 1);
  EXPECT_NE(err().find("error"), std::string::npos);
  EXPECT_NE(run("optimize " + path("missing.json")), 0);
  EXPECT_NE(run("optimize " + std::string(TREEOPT_TEST_DATA_DIR) + "/valid_small.json -m simplex"), 0);
}

TEST_F(Cli, ConvertDump) {
  ASSERT_EQ(run("convert " + std::string(TREEOPT_TEST_DATA_DIR) + "/forest_dump.txt -o " + path("f.json")), 0)
      << err();
  EXPECT_EQ(load_ensemble(path("f.json")).size(), 2u);
}

TEST_F(Cli, NodeLimitExitCode) {
  ASSERT_EQ(run("gen random --seed 11 --trees 20 --vars 6 --depth 4 -o " + path("e.json")), 0);
  const int code = run("optimize " + path("e.json") + " -m std-lin --node-limit 1 -o " + path("r.json"));
  const auto doc = nlohmann::json::parse(read(path("r.json")));
  EXPECT_EQ(code, doc["status"] == "optimal" ? 0 : 2) << doc["status"];
}

}  // namespace
}  // namespace treeopt

#endif
