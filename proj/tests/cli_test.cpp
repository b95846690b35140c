#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "gnnanatomy/io.hpp"

namespace gnnanatomy {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int status = -1;
  std::string output;
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(GNNANATOMY_CLI) + " " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("gnnanatomy_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, MissingRequiredOptionIsUsageError) {
  write_file_atomic(path("a.json"), "{}");
  const Outcome o = run_cli("measure --features " + path("a.json") + " --gnn " + path("a.json") + " --out-dir " + path("x"));
  EXPECT_NE(o.status, 0);
  EXPECT_NE(o.output.find("--edges"), std::string::npos);
}

TEST_F(CliTest, UnknownSubcommandFails) {
  EXPECT_NE(run_cli("frobnicate").status, 0);
  EXPECT_NE(run_cli("").status, 0);
}

TEST_F(CliTest, HelpListsDefaults) {
  const Outcome o = run_cli("train --help");
  EXPECT_EQ(o.status, 0);
  EXPECT_NE(o.output.find("--patience"), std::string::npos);
  EXPECT_NE(o.output.find("25"), std::string::npos);
  EXPECT_NE(o.output.find("0.001"), std::string::npos);
}

TEST_F(CliTest, TrainIsReproducible) {
  ASSERT_EQ(run_cli("synth --kind feature --nodes 60 --classes 2 --feat-dim 3 --seed 2 --out " + path("d.json")).status, 0);
  const std::string base = "train --dataset " + path("d.json") + " --model gcn --runs 1 --seed-base 7 --max-epochs 50";
  ASSERT_EQ(run_cli(base + " --out " + path("a.json")).status, 0);
  ASSERT_EQ(run_cli(base + " --out " + path("b.json")).status, 0);
  EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json")));
}

TEST_F(CliTest, BadDatasetReportsFile) {
  write_file_atomic(path("bad.json"), "{\"task\": 3}");
  const Outcome o = run_cli("train --dataset " + path("bad.json") + " --model gcn --out " + path("r.json"));
  EXPECT_EQ(o.status, 1);
  EXPECT_NE(o.output.find("bad.json"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("r.json")));
}

TEST_F(CliTest, FullPipelineWritesTables) {
  ASSERT_EQ(run_cli("synth --kind feature --nodes 60 --classes 2 --feat-dim 3 --seed 1 --out " + path("toy.json")).status, 0);
  const std::string common = " --dataset " + path("toy.json") + " --runs 3 --max-epochs 40";
  for (const std::string model : {"features", "edges", "gcn"}) {
    ASSERT_EQ(run_cli("train --model " + model + common + " --out " + path(model + ".runs.json")).status, 0) << model;
    ASSERT_EQ(run_cli("analyze --runs-file " + path(model + ".runs.json") + " --out " + path(model + ".set.json")).status, 0);
  }
  ASSERT_EQ(run_cli("measure --features " + path("features.set.json") + " --edges " + path("edges.set.json") + " --gnn " +
                    path("gcn.set.json") + " --out-dir " + path("m"))
                .status,
            0);
  ASSERT_EQ(run_cli("report --measure-dir " + path("m") + " --out " + path("r")).status, 0);
  const std::string table = read_file(path("r/table1.csv"));
  EXPECT_EQ(table.substr(0, table.find('\n')), "dataset,features,edges,e_fande,fande,fore,gnn");
  EXPECT_NE(table.find("\ntoy,"), std::string::npos);
}

}  // namespace
}  // namespace gnnanatomy
