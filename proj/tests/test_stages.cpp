#include <gtest/gtest.h>

#include <filesystem>

#include "fictdet/classifiers.hpp"
#include "fictdet/corpus.hpp"
#include "fictdet/error.hpp"
#include "fictdet/stages.hpp"
#include "fictdet/util.hpp"

using namespace fictdet;
namespace fs = std::filesystem;

namespace {

const std::string kData = std::string(FICTDET_TEST_DATA) + "/synthetic200.jsonl";

class StagesTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fictdet_stages_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& name) const { return (dir_ / name).string(); }

  void split_fixture() { run_stage("split", {{"in", kData}, {"out", at("split")}, {"seed", "3"}}); }

  fs::path dir_;
};

}  // namespace

TEST(StageNames, CanonicalOrder) {
  const auto& n = stage_names();
  ASSERT_EQ(n.size(), 15u);
  EXPECT_EQ(n.front(), "clean");
  EXPECT_EQ(n.back(), "letters");
  EXPECT_TRUE(is_stage("features-select"));
  EXPECT_FALSE(is_stage("nope"));
  EXPECT_THROW(run_stage("nope", {}), Error);
}

TEST_F(StagesTest, SplitWritesFourFilesDeterministically) {
  const auto r = run_stage("split", {{"in", kData}, {"out", at("a")}, {"seed", "3"}});
  EXPECT_EQ(r.summary["train"], 140);
  EXPECT_EQ(r.summary["validation"], 30);
  EXPECT_EQ(r.summary["test"], 30);
  EXPECT_EQ(r.outputs.size(), 4u);
  run_stage("split", {{"in", kData}, {"out", at("b")}, {"seed", "3"}});
  for (const char* f : {"train.jsonl", "validation.jsonl", "test.jsonl"})
    EXPECT_EQ(read_file(at("a/") + f), read_file(at("b/") + f)) << f;
}

TEST_F(StagesTest, ExistingOutputNeedsForce) {
  const StageParams p = {{"in", kData}, {"out", at("tok.tsv")}};
  run_stage("tokenize", p);
  const std::string before = read_file(at("tok.tsv"));
  try {
    run_stage("tokenize", p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("already exists"), std::string::npos);
  }
  EXPECT_EQ(read_file(at("tok.tsv")), before);
  StageParams forced = p;
  forced["force"] = "1";
  EXPECT_NO_THROW(run_stage("tokenize", forced));
  EXPECT_EQ(read_file(at("tok.tsv")), before);
}

TEST_F(StagesTest, TrainEvalOnSplit) {
  split_fixture();
  for (const std::string algo : {"linear", "nb", "logreg"}) {
    const auto t = run_stage("train", {{"algo", algo}, {"split", at("split")}, {"out", at(algo + ".model")}});
    EXPECT_GT(t.summary["vocabulary_size"].get<int>(), 0);
    const auto e = run_stage("eval", {{"model", at(algo + ".model")}, {"split", at("split")}, {"out", at(algo + ".tsv")}});
    EXPECT_GE(e.summary["accuracy"].get<double>(), 0.9) << algo;
    const auto tsv = read_file(at(algo + ".tsv"));
    EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "id\tscore\tpredicted\ttrue");
  }
}

TEST_F(StagesTest, BadParametersReported) {
  split_fixture();
  try {
    run_stage("train", {{"algo", "linear"}, {"split", at("split")}, {"out", at("m")}, {"lr", "fast"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("lr"), std::string::npos);
  }
  EXPECT_THROW(run_stage("train", {{"algo", "svm"}, {"split", at("split")}, {"out", at("m")}}), Error);
  EXPECT_THROW(run_stage("split", {{"in", kData}, {"out", at("s2")}, {"ratios", "0.5,0.5"}}), Error);
  EXPECT_THROW(run_stage("tokenize", {{"in", at("missing.jsonl")}, {"out", at("t")}}), Error);
}

TEST_F(StagesTest, FeaturesAblateEntropyExplain) {
  split_fixture();
  run_stage("train", {{"algo", "linear"}, {"split", at("split")}, {"out", at("lin.model")}});
  run_stage("features-stats", {{"split", at("split")}, {"out", at("stats.tsv")}});
  const auto sel = run_stage("features-select", {{"stats", at("stats.tsv")}, {"out", at("sel.tsv")}});
  EXPECT_GT(sel.summary["selected"].get<int>(), 0);
  const auto ab = run_stage("ablate", {{"model", at("lin.model")}, {"stats", at("stats.tsv")}, {"split", at("split")},
                                       {"n", "5"}, {"out", at("ab.csv")}});
  EXPECT_EQ(ab.summary["removed"], 5);
  const auto en = run_stage("entropy", {{"split", at("split")}, {"out", at("ent.csv")}, {"step", "500"}});
  EXPECT_TRUE(file_exists(at("ent-class0.csv")));
  EXPECT_TRUE(file_exists(at("ent-class1.csv")));
  EXPECT_NEAR(en.summary["gap_bits"].get<double>(),
              en.summary["class1_bits"].get<double>() - en.summary["class0_bits"].get<double>(), 1e-12);
  const auto ex = run_stage("explain", {{"model", at("lin.model")}, {"split", at("split")}, {"pair", "1"},
                                        {"out", at("ex.html")}});
  EXPECT_EQ(ex.summary["documents"].size(), 2u);
  EXPECT_EQ(read_file(at("ex.html")).rfind("<!DOCTYPE html>", 0), 0u);
}

TEST_F(StagesTest, CleanChunkPipelineStages) {
  std::string raw = "*** START OF THE PROJECT GUTENBERG EBOOK X ***\n";
  for (int i = 0; i < 80; ++i) raw += "The inspector walked to the door and looked out at the rain. ";
  raw += "\n*** END OF THE PROJECT GUTENBERG EBOOK X ***\nlicence text\n";
  write_file(at("raw.txt"), raw);
  run_stage("clean", {{"in", at("raw.txt")}, {"out", at("clean.txt")}});
  EXPECT_EQ(read_file(at("clean.txt")).find("GUTENBERG"), std::string::npos);
  const auto c = run_stage("chunk", {{"in", at("clean.txt")}, {"out", at("c.jsonl")}, {"seed", "1"},
                                     {"source", "The Test Book"}});
  const auto samples = load_dataset(at("c.jsonl"));
  EXPECT_EQ(c.summary["samples"].get<std::size_t>(), samples.size());
  ASSERT_FALSE(samples.empty());
  EXPECT_EQ(samples[0].source, "The Test Book");
  for (const auto& s : samples) {
    // Sentences are 12 words, so one more would overshoot the drawn target.
    EXPECT_GT(s.word_count, 92u - 12u);
    EXPECT_LE(s.word_count, 125u);
  }
  EXPECT_EQ(stage_output_paths("chunk", {{"out", at("c.jsonl")}}).size(), 2u);
}

TEST_F(StagesTest, RewriteNeedsApiKey) {
  write_file(at("cfg.json"), R"({"api_key_env":"FICTDET_TEST_UNSET_KEY_VAR"})");
  ::unsetenv("FICTDET_TEST_UNSET_KEY_VAR");
  split_fixture();
  try {
    run_stage("rewrite", {{"in", at("split/test.jsonl")}, {"config", at("cfg.json")}, {"out", at("r.jsonl")}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("FICTDET_TEST_UNSET_KEY_VAR"), std::string::npos);
  }
}

TEST(StagePaths, InputsAndOutputs) {
  EXPECT_EQ(stage_input_paths("train", {{"split", "s"}}),
            (std::vector<std::string>{"s/train.jsonl", "s/validation.jsonl"}));
  EXPECT_EQ(stage_input_paths("train", {{"split", "s"}, {"algo", "nb"}}), (std::vector<std::string>{"s/train.jsonl"}));
  EXPECT_EQ(stage_output_paths("split", {{"out", "d"}}).size(), 4u);
  EXPECT_EQ(stage_input_paths("tokenize", {{"in", "x"}, {"out", "y"}}), (std::vector<std::string>{"x"}));
}
