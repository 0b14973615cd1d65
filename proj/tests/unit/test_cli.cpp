#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace {

namespace fs = std::filesystem;
const fs::path kData = fs::path(DIALECT_SOURCE_DIR) / "data";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dialect::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dialect_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"data"}).code, 1);
  EXPECT_EQ(run({"data", "expand-pairs", "--pairs", "x.jsonl"}).code, 1);
}

TEST_F(Cli, HelpAndVersionExitZero) {
  EXPECT_EQ(run({"--help"}).code, 0);
  const Result v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_FALSE(v.out.empty());
}

TEST_F(Cli, MissingAndMalformedInputsExitOne) {
  EXPECT_EQ(run({"data", "validate", "--catalog", p("missing.jsonl")}).code, 1);
  std::ofstream(p("bad.jsonl")) << "{not json\n";
  const Result r = run({"data", "validate", "--catalog", p("bad.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(Cli, ValidatesBundledData) {
  const Result r = run({"data", "validate", "--catalog", (kData / "catalog_lange.jsonl").string(),
                        "--pairs", (kData / "pairs_lange.jsonl").string()});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, ExpandPairsWritesInstancesAndManifest) {
  const Result r = run({"data", "expand-pairs", "--pairs",
                        (kData / "figure_pairs.jsonl").string(), "--catalog",
                        (kData / "figure_catalog.jsonl").string(), "--out", p("inst.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(p("inst.jsonl"));
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) lines += !l.empty();
  EXPECT_EQ(lines, 8u);
  EXPECT_TRUE(fs::exists(p("inst.jsonl.manifest.json")));
}

TEST_F(Cli, RuntimeErrorsExitTwo) {
  // Asking for more texts than exist is a runtime failure, not bad input.
  ASSERT_EQ(run({"data", "expand-pairs", "--pairs", (kData / "figure_pairs.jsonl").string(),
                 "--catalog", (kData / "figure_catalog.jsonl").string(), "--out",
                 p("inst.jsonl")})
                .code,
            0);
  EXPECT_EQ(run({"data", "subsample", "--in", p("inst.jsonl"), "--n", "99", "--out",
                 p("sub.jsonl")})
                .code,
            2);
}

TEST_F(Cli, EndToEndPipeline) {
  ASSERT_EQ(run({"--seed", "4", "data", "synth", "--out", p("syn"), "--features", "3",
                 "--transcripts", "4", "--examples", "5"})
                .code,
            0);
  const std::string syn = p("syn");
  ASSERT_EQ(run({"data", "expand-pairs", "--pairs", syn + "/pairs.jsonl", "--catalog",
                 syn + "/catalog.jsonl", "--out", p("train.jsonl")})
                .code,
            0);
  Result r = run({"train", "multihead", "--train", p("train.jsonl"), "--out", p("mh"),
                  "--epochs", "3", "--dimension", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"detect", "learned", "--model", p("mh"), "--in", syn + "/corpus.jsonl", "--out",
           p("scores.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"eval", "auc", "--scores", p("scores.jsonl"), "--corpus", syn + "/corpus.jsonl",
           "--annotations", syn + "/annotations.jsonl", "--catalog", syn + "/catalog.jsonl"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Macro-AUC"), std::string::npos) << r.out;

  r = run({"ddm", "score", "--method", "gold", "--in", syn + "/corpus.jsonl", "--annotations",
           syn + "/annotations.jsonl", "--catalog", syn + "/catalog.jsonl", "--out",
           p("gold.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"ddm", "score", "--method", "learned", "--model", p("mh"), "--in",
           syn + "/corpus.jsonl", "--out", p("ddm.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"eval", "rank", "--ddm", p("ddm.jsonl"), "--gold", p("gold.jsonl")});
  EXPECT_EQ(r.code, 0) << r.err;

  r = run({"detect", "learned", "--model", p("mh"), "--in", syn + "/corpus.jsonl", "--out",
           p("s2.jsonl"), "--features", "not_a_feature"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, ExperimentKindMustMatchConfig) {
  std::ofstream(p("g.cfg")) << "kind = grid\n";
  EXPECT_EQ(run({"experiment", "curve", "--config", p("g.cfg"), "--out", p("runs")}).code, 1);
}

}  // namespace
