// Exercises the shared library through its C interface only, and the CLI
// binary as a subprocess.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fictdet/fictdet.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kData = std::string(FICTDET_TEST_DATA) + "/synthetic200.jsonl";

std::string take(char* s) {
  std::string out = s ? s : "";
  fd_string_free(s);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fictdet_capi_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the CLI; returns its exit status and stores stdout.
  int cli(const std::string& args, std::string* out = nullptr) {
    const std::string capture = at("cli.out");
    const std::string cmd = std::string("\"") + FICTDET_CLI + "\" " + args + " > \"" + capture + "\" 2> \"" +
                            at("cli.err") + "\"";
    const int rc = std::system(cmd.c_str());
    if (out) *out = slurp(capture);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  fs::path dir_;
};

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(fd_version(), "0.3.0");
  EXPECT_STREQ(fd_status_name(FD_OK), "ok");
  EXPECT_STREQ(fd_status_name(FD_ERR_PARSE), "parse error");
}

TEST(CApi, TextFunctions) {
  char* out = nullptr;
  size_t n = 0;
  ASSERT_EQ(fd_tokenize("He said, 'Hello'.", &out, &n), FD_OK);
  EXPECT_EQ(take(out), "He said , ' Hello ' .");
  EXPECT_EQ(n, 7u);
  ASSERT_EQ(fd_normalize_punctuation("“a”—b", &out), FD_OK);
  EXPECT_EQ(take(out), "\"a\"-b");
  ASSERT_EQ(fd_build_prompt("She left.", &out), FD_OK);
  const std::string prompt = take(out);
  EXPECT_EQ(prompt.substr(prompt.size() - 9), "She left.");
  EXPECT_EQ(fd_build_prompt("", &out), FD_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(fd_last_error()).find("empty"), std::string::npos);
  EXPECT_EQ(fd_tokenize(nullptr, &out, &n), FD_ERR_INVALID_ARGUMENT);
}

TEST(CApi, DatasetErrors) {
  fd_dataset* ds = nullptr;
  EXPECT_EQ(fd_dataset_load("/no/such/file.jsonl", &ds), FD_ERR_IO);
  EXPECT_EQ(ds, nullptr);
  EXPECT_EQ(fd_dataset_parse("{\"id\":\"x\"}\n", &ds), FD_ERR_PARSE);
  EXPECT_NE(std::string(fd_last_error()).find(":1"), std::string::npos);
}

TEST_F(CApiTest, EndToEndThroughHandles) {
  fd_dataset* all = nullptr;
  ASSERT_EQ(fd_dataset_load(kData.c_str(), &all), FD_OK);
  EXPECT_EQ(fd_dataset_size(all), 200u);
  const char *id = nullptr, *source = nullptr;
  int label = -1;
  ASSERT_EQ(fd_dataset_get(all, 1, &id, nullptr, &label, &source), FD_OK);
  EXPECT_EQ(label, 1);
  EXPECT_EQ(std::string(source), "rewritten:" + std::string(id).substr(0, std::string(id).size() - 4));
  EXPECT_EQ(fd_dataset_get(all, 200, &id, nullptr, nullptr, nullptr), FD_ERR_INVALID_ARGUMENT);

  fd_dataset *tr = nullptr, *va = nullptr, *te = nullptr;
  ASSERT_EQ(fd_split_dataset(all, 0.7, 0.15, 0.15, 3, &tr, &va, &te), FD_OK);
  EXPECT_EQ(fd_dataset_size(tr), 140u);
  EXPECT_EQ(fd_dataset_size(va), 30u);
  EXPECT_EQ(fd_dataset_size(te), 30u);

  for (fd_model_kind kind : {FD_MODEL_LINEAR, FD_MODEL_LOGREG, FD_MODEL_NB}) {
    fd_model* m = nullptr;
    ASSERT_EQ(fd_model_train(kind, tr, va, 1, &m), FD_OK) << fd_last_error();
    EXPECT_EQ(fd_model_get_kind(m), kind);
    EXPECT_GT(fd_model_vocabulary_size(m), 50u);
    double acc = 0;
    ASSERT_EQ(fd_model_evaluate(m, te, &acc), FD_OK);
    EXPECT_GE(acc, 0.9);
    const std::string path = at("m" + std::to_string(kind) + ".model");
    ASSERT_EQ(fd_model_save(m, path.c_str()), FD_OK);
    fd_model* back = nullptr;
    ASSERT_EQ(fd_model_load(path.c_str(), &back), FD_OK);
    double s1 = 0, s2 = 0;
    int l1 = 0, l2 = 0;
    ASSERT_EQ(fd_model_score_text(m, "She delved into the intricate tapestry.", &s1, &l1), FD_OK);
    ASSERT_EQ(fd_model_score_text(back, "She delved into the intricate tapestry.", &s2, &l2), FD_OK);
    EXPECT_EQ(s1, s2);
    EXPECT_EQ(l1, 1);
    char* html = nullptr;
    double w = 0;
    if (kind == FD_MODEL_NB) {
      EXPECT_EQ(fd_model_explain_html(m, "text", "x", &html), FD_ERR_INVALID_ARGUMENT);
      EXPECT_EQ(fd_model_weight(m, "delved", &w), FD_ERR_INVALID_ARGUMENT);
    } else {
      ASSERT_EQ(fd_model_explain_html(m, "She delved.", "x", &html), FD_OK);
      EXPECT_EQ(take(html).rfind("<!DOCTYPE html>", 0), 0u);
      ASSERT_EQ(fd_model_weight(m, "delved", &w), FD_OK);
      EXPECT_GT(w, 0.0);
      ASSERT_EQ(fd_model_weight(m, "zzz-not-a-token", &w), FD_OK);
      EXPECT_EQ(w, 0.0);
    }
    fd_model_free(back);
    fd_model_free(m);
  }

  fd_stats* st = nullptr;
  ASSERT_EQ(fd_stats_compute(tr, &st), FD_OK);
  EXPECT_GT(fd_stats_size(st), 50u);
  const char* token = nullptr;
  double f0 = 0, f1 = 0, r = 0;
  ASSERT_EQ(fd_stats_get(st, 0, &token, &f0, &f1, &r), FD_OK);
  EXPECT_GE(r, 0.5);
  size_t count = 0;
  ASSERT_EQ(fd_stats_select_count(st, 100, 0.75, &count), FD_OK);
  EXPECT_GT(count, 0u);
  fd_stats_free(st);

  double h0 = 0, h1 = 0, mean = 0, sd = 0;
  ASSERT_EQ(fd_class_entropy(all, 0, &h0), FD_OK);
  ASSERT_EQ(fd_class_entropy(all, 1, &h1), FD_OK);
  EXPECT_GT(h0, 0.0);
  EXPECT_GT(h1, 0.0);
  ASSERT_EQ(fd_length_stats(all, 0, &mean, &sd), FD_OK);
  EXPECT_GT(mean, 0.0);
  EXPECT_EQ(fd_class_entropy(all, 2, &h0), FD_ERR_INVALID_ARGUMENT);

  fd_dataset_free(tr);
  fd_dataset_free(va);
  fd_dataset_free(te);
  fd_dataset_free(all);
}

TEST_F(CApiTest, ChunkText) {
  std::string text;
  for (int i = 0; i < 60; ++i) text += "The rain fell on the quiet street all night. ";
  fd_dataset* ds = nullptr;
  ASSERT_EQ(fd_chunk_text(text.c_str(), 7, 92, 125, "book", "Book", &ds), FD_OK);
  ASSERT_GT(fd_dataset_size(ds), 0u);
  const char* id = nullptr;
  ASSERT_EQ(fd_dataset_get(ds, 0, &id, nullptr, nullptr, nullptr), FD_OK);
  EXPECT_EQ(std::string(id), "book-00000");
  fd_dataset_free(ds);
  EXPECT_EQ(fd_chunk_text(text.c_str(), 7, 130, 120, "b", "B", &ds), FD_ERR_INVALID_ARGUMENT);
}

TEST_F(CApiTest, StageRunReportsJson) {
  const std::string out = at("split");
  const char* keys[] = {"in", "out", "seed"};
  const char* values[] = {kData.c_str(), out.c_str(), "3"};
  char* report = nullptr;
  ASSERT_EQ(fd_stage_run("split", keys, values, 3, &report), FD_OK) << fd_last_error();
  const auto j = nlohmann::json::parse(take(report));
  EXPECT_EQ(j["stage"], "split");
  EXPECT_EQ(j["summary"]["train"], 140);
  EXPECT_EQ(j["outputs"].size(), 4u);
  EXPECT_EQ(fd_stage_run("split", keys, values, 3, &report), FD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(fd_stage_run("bogus", keys, values, 3, &report), FD_ERR_INVALID_ARGUMENT);
}

TEST_F(CApiTest, PipelineRun) {
  std::ofstream(at("p.ini")) << "[split]\nin = " << kData << "\nout = " << at("split") << "\nseed = 2\n"
                             << "[train]\nalgo = nb\nsplit = " << at("split") << "\nout = " << at("nb.model") << "\n";
  char* manifest = nullptr;
  ASSERT_EQ(fd_pipeline_run(at("p.ini").c_str(), 0, &manifest), FD_OK) << fd_last_error();
  const auto j = nlohmann::json::parse(take(manifest));
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["stages"].size(), 2u);
  EXPECT_EQ(fd_pipeline_run(at("p.ini").c_str(), 0, &manifest), FD_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(fd_pipeline_run(at("p.ini").c_str(), 1, &manifest), FD_OK);
  fd_string_free(manifest);
}

TEST_F(CApiTest, CliCommands) {
  std::string out;
  EXPECT_EQ(cli("--version", &out), 0);
  EXPECT_NE(out.find("0.3.0"), std::string::npos);
  ASSERT_EQ(cli("corpus split --in \"" + kData + "\" --out \"" + at("split") + "\" --seed 3", &out), 0);
  EXPECT_EQ(nlohmann::json::parse(out)["summary"]["test"], 30);
  ASSERT_EQ(cli("train --algo nb --split \"" + at("split") + "\" --out \"" + at("nb.model") + "\""), 0);
  ASSERT_EQ(cli("eval --model \"" + at("nb.model") + "\" --split \"" + at("split") + "\" --set test", &out), 0);
  EXPECT_GE(nlohmann::json::parse(out)["summary"]["accuracy"].get<double>(), 0.9);
  ASSERT_EQ(cli("tokenize --in \"" + kData + "\" --out \"" + at("tok.tsv") + "\""), 0);
  EXPECT_TRUE(fs::exists(at("tok.tsv")));
  // Immutable outputs: a second run without --force fails and leaves the file alone.
  const std::string before = slurp(at("tok.tsv"));
  EXPECT_EQ(cli("tokenize --in \"" + kData + "\" --out \"" + at("tok.tsv") + "\""), FD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(slurp(at("tok.tsv")), before);
  EXPECT_EQ(cli("tokenize --in \"" + kData + "\" --out \"" + at("tok.tsv") + "\" --force"), 0);
  EXPECT_EQ(cli("eval --model \"" + at("missing.model") + "\" --split \"" + at("split") + "\""), FD_ERR_IO);
  EXPECT_NE(cli("no-such-command"), 0);
}

TEST_F(CApiTest, CliPipeline) {
  std::ofstream(at("p.ini")) << "stages = tokenize\n[tokenize]\nin = " << kData << "\nout = " << at("t.tsv") << "\n"
                             << "[split]\nin = " << kData << "\nout = " << at("split") << "\n";
  std::string out;
  ASSERT_EQ(cli("pipeline run --config \"" + at("p.ini") + "\"", &out), 0);
  EXPECT_EQ(nlohmann::json::parse(out)["stages"].size(), 1u);
  EXPECT_TRUE(fs::exists(at("p.ini.manifest.json")));
  std::ofstream(at("bad.ini")) << "[train]\nalgo = nb\nsplit = " << at("nowhere") << "\nout = " << at("m") << "\n";
  EXPECT_EQ(cli("pipeline run --config \"" + at("bad.ini") + "\""), FD_ERR_MISSING_INPUT);
  EXPECT_NE(slurp(at("cli.err")).find("nowhere"), std::string::npos);
}
