#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include "fcgrow/parse.hpp"
#include "fcgrow/report.hpp"
#include "support/corpus.hpp"

using namespace fcgrow;
using namespace fcgrow::testing;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the tool with stderr discarded.
Run fcgrow_run(const std::string& args) {
  std::string cmd = std::string(FCGROW_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  char buf[4096];
  for (std::size_t k; (k = fread(buf, 1, sizeof buf, f)) > 0;) r.out.append(buf, k);
  int status = pclose(f);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string sample(const std::string& name) { return samples_dir() + "/" + name; }

std::string tmp(const std::string& name) {
  auto dir = std::filesystem::path(::testing::TempDir()) / "fcgrow_cli";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    if (std::string(FCGROW_CLI_PATH).empty()) GTEST_SKIP() << "fcgrow was not built";
  }
};

}  // namespace

TEST_F(Cli, DoublingExitsTwo) {
  for (auto name : {"doubling.fc", "doubling.lare", "doubling.loop"}) {
    auto r = fcgrow_run("analyze --json -i " + sample(name));
    EXPECT_EQ(r.code, 2) << name;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["growth"][0]["var"], "x1");
    EXPECT_EQ(j["growth"][0]["growth"], "Superpolynomial");
  }
}

TEST_F(Cli, X5ExitsZero) {
  EXPECT_EQ(fcgrow_run("analyze -i " + sample("x5_loop.fc")).code, 0);
  EXPECT_EQ(fcgrow_run("analyze -i " + sample("x5.loop")).code, 0);
  EXPECT_EQ(fcgrow_run("analyze --mode explicit -i " + sample("x5_loop.fc")).code, 0);
}

TEST_F(Cli, RootCycleExitsOneWithDiagnostic) {
  auto r = fcgrow_run("analyze --json -i " + sample("invalid/root_cycle.fc"));
  EXPECT_EQ(r.code, 1);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["error"]["kind"], "InvalidProgram");
  EXPECT_EQ(j["error"]["violations"][0]["kind"], "RootCycle");
}

TEST_F(Cli, ParseErrorCarriesLocation) {
  auto r = fcgrow_run("check --json -i " + sample("invalid/syntax.fc"));
  EXPECT_EQ(r.code, 1);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["error"]["kind"], "ParseError");
  EXPECT_EQ(j["error"]["line"], 4);
  EXPECT_EQ(j["error"]["column"], 11);
}

TEST_F(Cli, InvalidSamplesExitOne) {
  for (auto& e : std::filesystem::directory_iterator(samples_dir() + "/invalid"))
    EXPECT_EQ(fcgrow_run("analyze -i " + e.path().string()).code, 1) << e.path();
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(fcgrow_run("analyze").code, 1);
  EXPECT_EQ(fcgrow_run("frobnicate").code, 1);
  EXPECT_EQ(fcgrow_run("analyze --format cobol -i x.fc").code, 1);
  EXPECT_EQ(fcgrow_run("analyze --mode explicit -i " + sample("doubling.lare")).code, 1);
  EXPECT_EQ(fcgrow_run("oracle --var 1 --init 1,x -i " + sample("doubling.lare")).code, 1);
  EXPECT_EQ(fcgrow_run("diag --matrices -i " + sample("x5.loop")).code, 1);
  EXPECT_EQ(fcgrow_run("--help").code, 0);
}

TEST_F(Cli, FormatOverride) {
  std::string path = tmp("doubling.txt");
  std::filesystem::copy_file(sample("doubling.loop"), path,
                             std::filesystem::copy_options::overwrite_existing);
  EXPECT_EQ(fcgrow_run("analyze -i " + path).code, 1);
  EXPECT_EQ(fcgrow_run("analyze --format loop -i " + path).code, 2);
}

TEST_F(Cli, ReportsAreByteIdentical) {
  for (auto& e : std::filesystem::directory_iterator(samples_dir())) {
    if (!e.is_regular_file()) continue;
    for (auto args : {"analyze --json -i ", "analyze -i ", "diag --json -i "}) {
      auto a = fcgrow_run(args + e.path().string()), b = fcgrow_run(args + e.path().string());
      EXPECT_EQ(a.code, b.code) << e.path();
      EXPECT_EQ(a.out, b.out) << e.path();
      EXPECT_FALSE(a.out.empty()) << e.path();
    }
  }
}

TEST_F(Cli, JsonKeysAreSorted) {
  auto r = fcgrow_run("analyze --json -i " + sample("two_exits.fc"));
  auto j = nlohmann::json::parse(r.out);
  // Re-serializing a parsed document sorts keys; equal text means they already were.
  EXPECT_EQ(j.dump(2) + "\n", r.out);
  EXPECT_FALSE(j.contains("timing_ms"));
  auto t = nlohmann::json::parse(fcgrow_run("analyze --json --timing -i " + sample("two_exits.fc")).out);
  EXPECT_TRUE(t.contains("timing_ms"));
}

TEST_F(Cli, OutFlagWritesFile) {
  std::string path = tmp("report.json");
  std::filesystem::remove(path);
  auto r = fcgrow_run("analyze --json -i " + sample("doubling.fc") + " --out " + path);
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(nlohmann::json::parse(read_file(path))["schema"], 1);
}

TEST_F(Cli, ConvertEmitsReparsableLare) {
  std::string lare = tmp("contract.lare"), dot = tmp("contract.dot");
  auto r = fcgrow_run("convert --json -i " + sample("contract_loop.fc") + " --emit-lare " + lare +
                      " --emit-dot " + dot + " --trace-stages");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["mode"], "explicit");
  auto prog = parse_lare_program(read_file(lare));
  EXPECT_EQ(prog.n, 3);
  EXPECT_EQ(print_lare(prog.expr), j["pairs"][0]["lare"].get<std::string>());
  // The emitted expression analyzes to the reported dependency set.
  DepSet deps = analyze_lare(prog.expr, prog.n);
  std::vector<std::string> un;
  for (auto d : deps.unaries()) un.push_back(to_string(d));
  EXPECT_EQ(nlohmann::json(un), j["pairs"][0]["deps"]["unary"]);

  std::string stages = read_file(dot);
  EXPECT_NE(stages.find("// stage: initial"), std::string::npos);
  EXPECT_NE(stages.find("// stage: final"), std::string::npos);
  fcgrow_run("convert -i " + sample("contract_loop.fc") + " --emit-dot " + dot);
  stages = read_file(dot);
  EXPECT_EQ(stages.find("// stage: initial"), std::string::npos);
  EXPECT_NE(stages.find("// stage: final"), std::string::npos);
}

TEST_F(Cli, ConvertSplitsPairsIntoFiles) {
  std::string lare = tmp("two.lare");
  ASSERT_EQ(fcgrow_run("convert -i " + sample("two_exits.fc") + " --emit-lare " + lare).code, 0);
  auto j = nlohmann::json::parse(fcgrow_run("analyze --json -i " + sample("two_exits.fc")).out);
  for (auto& p : j["pairs"]) {
    std::string path = tmp("two." + p["entry"].get<std::string>() + "_" + p["exit"].get<std::string>() + ".lare");
    EXPECT_NO_THROW(parse_lare_program(read_file(path))) << path;
  }
}

TEST_F(Cli, ConvertBudget) {
  auto r = fcgrow_run("convert --json --budget 20 -i " + sample("contract_loop.fc"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(nlohmann::json::parse(r.out)["error"]["kind"], "SizeBudgetExceeded");
}

TEST_F(Cli, Oracle) {
  auto r = fcgrow_run("oracle --json --var 1 --init 1,2,3,4,5 -i " + sample("doubling.lare"));
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["verdict"], "LooksExp");
  EXPECT_EQ(j["values"], nlohmann::json::array({"2", "8", "24", "64", "160"}));
  EXPECT_EQ(j["var"], "x1");
  EXPECT_EQ(j["truncated"], false);

  j = nlohmann::json::parse(fcgrow_run("oracle --json --var 1 --init 1,2,3,4,5 -i " + sample("x5_loop.fc")).out);
  EXPECT_EQ(j["verdict"], "LooksPoly");

  j = nlohmann::json::parse(fcgrow_run("oracle --json --var 2 --init 1 --huge 5 -i " + sample("huge.fc")).out);
  EXPECT_EQ(j["values"], nlohmann::json::array({"5"}));

  j = nlohmann::json::parse(
      fcgrow_run("oracle --json --var 1 --init 4 --max-len 3 -i " + sample("doubling.fc")).out);
  EXPECT_EQ(j["truncated"], true);
}

TEST_F(Cli, DiagWritesSrgAndMatrices) {
  std::string dot = tmp("choose.dot");
  auto r = fcgrow_run("diag --json --matrices --srg " + dot + " -i " + sample("choose.lare"));
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["pairs"][0]["matrices"].size(), 3u);
  std::string s = read_file(dot);
  EXPECT_NE(s.find("x1 -> x3 [label=\"2\"];"), std::string::npos);
}

TEST_F(Cli, LogLevelFromEnvironment) {
  std::string cmd = "FCGROW_LOG=info " + std::string(FCGROW_CLI_PATH) + " analyze -i " +
                    sample("doubling.fc") + " 2>&1 >/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  ASSERT_NE(f, nullptr);
  std::string err;
  char buf[512];
  for (std::size_t k; (k = fread(buf, 1, sizeof buf, f)) > 0;) err.append(buf, k);
  pclose(f);
  EXPECT_NE(err.find("[info]"), std::string::npos);
  // Default level is error, so a successful run is silent on stderr.
  cmd = std::string(FCGROW_CLI_PATH) + " analyze -i " + sample("doubling.fc") + " 2>&1 >/dev/null";
  f = popen(cmd.c_str(), "r");
  err.clear();
  for (std::size_t k; (k = fread(buf, 1, sizeof buf, f)) > 0;) err.append(buf, k);
  pclose(f);
  EXPECT_TRUE(err.empty()) << err;
}
