// End-to-end runs of the genvor binary on the files in tests/data.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Proc {
  int code = -1;
  std::string out;
};

Proc run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + GENVOR_BIN + " " + args + (std::getenv("CLI_TEST_STDERR") ? "" : " 2>/dev/null");
  Proc r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data_file(const std::string& name) { return std::string(DATA_DIR) + "/" + name; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("genvor_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_F(Cli, BuildSummaryAndQuery) {
  Proc b = run("build " + data_file("mo3.json") + " -o " + tmp("a.bin"));
  ASSERT_EQ(b.code, 0);
  json s = json::parse(b.out);
  EXPECT_EQ(s["family"], "mult_offset");
  EXPECT_EQ(s["n"], 3);
  EXPECT_EQ(s["seed"], 7);
  EXPECT_LE(s["depth"].get<int>(), s["depth_bound"].get<int>());

  Proc q = run("query " + tmp("a.bin") + " " + data_file("queries2.json"));
  ASSERT_EQ(q.code, 0);
  std::istringstream lines(q.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    json j = json::parse(line);
    EXPECT_TRUE(j.contains("id") && j.contains("value") && j.contains("denormalized_value"));
    ++count;
  }
  EXPECT_EQ(count, 5);
}

TEST_F(Cli, FlattenedAnswersMatchTheTree) {
  for (const char* inst : {"mo3.json", "scaling3.json", "fn3.json"}) {
    ASSERT_EQ(run(std::string("build ") + data_file(inst) + " -o " + tmp("a.bin")).code, 0) << inst;
    std::string qs = std::string(inst) == "fn3.json" ? "queries3.json" : "queries2.json";
    Proc a = run("query " + tmp("a.bin") + " " + data_file(qs));
    Proc b = run("query " + tmp("a.bin") + " " + data_file(qs) + " --flatten");
    ASSERT_EQ(a.code, 0) << inst;
    ASSERT_EQ(b.code, 0) << inst;
    EXPECT_EQ(a.out, b.out) << inst;
  }
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("build " + data_file("bad_eps.json") + " -o " + tmp("a.bin")).code, 2);
  EXPECT_EQ(run("build " + data_file("scaling_dim3.json") + " -o " + tmp("a.bin")).code, 2);
  EXPECT_EQ(run("build " + data_file("spiky.json") + " -o " + tmp("a.bin")).code, 3);
  EXPECT_EQ(run("build " + tmp("missing.json") + " -o " + tmp("a.bin")).code, 1);
  EXPECT_EQ(run("frobnicate").code, 2);
  ASSERT_EQ(run("build " + data_file("mo3.json") + " -o " + tmp("a.bin")).code, 0);
  EXPECT_EQ(run("query " + tmp("a.bin") + " " + data_file("queries3.json")).code, 2);
  std::ofstream(tmp("junk.bin")) << "not an artifact";
  EXPECT_EQ(run("query " + tmp("junk.bin") + " " + data_file("queries2.json")).code, 2);
}

TEST_F(Cli, SeedOverrideChangesTheArtifact) {
  ASSERT_EQ(run("build " + data_file("mo3.json") + " -o " + tmp("a.bin")).code, 0);
  Proc b = run("build " + data_file("mo3.json") + " -o " + tmp("b.bin"), "GENVOR_SEED=99");
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(json::parse(b.out)["seed"], 99);
  ASSERT_EQ(run("build " + data_file("mo3.json") + " -o " + tmp("c.bin"), "GENVOR_SEED=99").code, 0);
  EXPECT_NE(slurp(tmp("a.bin")), slurp(tmp("b.bin")));
  EXPECT_EQ(slurp(tmp("b.bin")), slurp(tmp("c.bin")));
  EXPECT_EQ(run("build " + data_file("mo3.json") + " -o " + tmp("d.bin"), "GENVOR_SEED=abc").code, 2);
}

TEST_F(Cli, ExportAndDump) {
  ASSERT_EQ(run("build " + data_file("mo3.json") + " -o " + tmp("a.bin") + " --dump " + tmp("tree.txt")).code, 0);
  std::string dump = slurp(tmp("tree.txt"));
  EXPECT_EQ(dump.rfind("0 (0,0)", 0), 0u);
  Proc e = run("export-avd " + tmp("a.bin"));
  ASSERT_EQ(e.code, 0);
  json doc = json::parse(e.out);
  EXPECT_EQ(doc["family"], "mult_offset");
  ASSERT_FALSE(doc["regions"].empty());
  // The outer cells of the regions tile the unit square up to their holes.
  double area = 0;
  for (const auto& r : doc["regions"]) {
    const auto &lo = r["outer_cell"]["lo"], &hi = r["outer_cell"]["hi"];
    double a = (hi[0].get<double>() - lo[0].get<double>()) * (hi[1].get<double>() - lo[1].get<double>());
    if (r.contains("inner_cell")) {
      const auto &ilo = r["inner_cell"]["lo"], &ihi = r["inner_cell"]["hi"];
      a -= (ihi[0].get<double>() - ilo[0].get<double>()) * (ihi[1].get<double>() - ilo[1].get<double>());
    }
    area += a;
    EXPECT_FALSE(r["candidates"].empty());
  }
  EXPECT_NEAR(area, 1.0, 1e-9);
  ASSERT_EQ(run("export-avd " + tmp("a.bin") + " -o " + tmp("avd.json")).code, 0);
  EXPECT_EQ(json::parse(slurp(tmp("avd.json"))), doc);
}

TEST_F(Cli, SelftestIsDeterministicAndCatchesFaults) {
  Proc a = run("selftest --family mult_offset --seed 5 --budget 200");
  Proc b = run("selftest --family mult_offset --seed 5 --budget 200");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_TRUE(json::parse(a.out)["pass"].get<bool>());
  Proc f = run("selftest --family mult_offset --seed 5 --budget 200 --inject-fault");
  EXPECT_EQ(f.code, 1);
  EXPECT_FALSE(json::parse(f.out)["pass"].get<bool>());
  EXPECT_EQ(run("selftest --family nope").code, 2);
}

TEST_F(Cli, BenchCsv) {
  Proc r = run("bench " + data_file("mo3.json") + " --queries 100");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("n,build_ms,bytes,avg_locates_per_query,avg_query_ns,brute_force_query_ns\n3,", 0), 0u);
}
