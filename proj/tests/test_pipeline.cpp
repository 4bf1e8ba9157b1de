#include <gtest/gtest.h>

#include <filesystem>

#include "fictdet/error.hpp"
#include "fictdet/pipeline.hpp"
#include "fictdet/util.hpp"

using namespace fictdet;
namespace fs = std::filesystem;

namespace {

const std::string kData = std::string(FICTDET_TEST_DATA) + "/synthetic200.jsonl";

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fictdet_pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_config(const std::string& body) {
    const std::string path = at("run.ini");
    write_file(path, body);
    return path;
  }

  // split -> train (nb + linear) -> eval -> entropy, listed out of order.
  std::string full_config() {
    return write_config("seed = 5\n"
                        "[eval]\nmodel = " + at("nb.model") + "\nsplit = " + at("split") + "\n"
                        "[train:nb]\nalgo = nb\nsplit = " + at("split") + "\nout = " + at("nb.model") + "\n"
                        "[split]\nin = " + kData + "\nout = " + at("split") + "\n"
                        "[train:linear]\nalgo = linear\nsplit = " + at("split") + "\nout = " + at("lin.model") + "\n"
                        "[entropy]\nsplit = " + at("split") + "\nout = " + at("ent.csv") + "\n");
  }

  fs::path dir_;
};

std::vector<std::string> names(const PipelineConfig& c) {
  std::vector<std::string> n;
  for (const auto& s : c.sections) n.push_back(s.name);
  return n;
}

}  // namespace

TEST(PipelineConfigParse, SectionsGlobalsAndOrder) {
  const auto c = parse_pipeline_config("# c\nseed = 4\n; other\n[train]\nalgo = nb\n[split]\nin = a\nseed = 9\n");
  EXPECT_EQ(names(c), (std::vector<std::string>{"split", "train"}));
  EXPECT_EQ(c.sections[0].params.at("seed"), "9");
  EXPECT_EQ(c.sections[1].params.at("seed"), "4");
  EXPECT_EQ(c.sections[1].line, 4u);
  EXPECT_TRUE(c.manifest_path.empty());
}

TEST(PipelineConfigParse, StagesSelection) {
  const auto c = parse_pipeline_config("stages = tokenize\n[split]\nin = a\n[tokenize]\nin = b\nout = c\n");
  EXPECT_EQ(names(c), (std::vector<std::string>{"tokenize"}));
  EXPECT_FALSE(c.sections[0].params.count("stages"));
  EXPECT_THROW(parse_pipeline_config("stages = train\n[split]\nin = a\n"), Error);
}

TEST(PipelineConfigParse, ErrorsNameTheLine) {
  const auto expect_parse = [](const std::string& text, const std::string& where) {
    try {
      parse_pipeline_config(text, "cfg.ini");
      ADD_FAILURE() << "no error for " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Parse);
      EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
    }
  };
  expect_parse("[split]\nin = a\n[bogus]\n", "cfg.ini:3");
  expect_parse("[split]\nin = a\nin = b\n", "cfg.ini:3");
  expect_parse("[split]\n[split]\n", "cfg.ini:2");
  expect_parse("\n[split]\njust words\n", "cfg.ini:3");
  expect_parse("[split\n", "cfg.ini:1");
}

TEST(PipelineConfigParse, ManifestPath) {
  EXPECT_EQ(parse_pipeline_config("[split]\n", "x.ini").manifest_path, "x.ini.manifest.json");
  EXPECT_EQ(parse_pipeline_config("manifest = m.json\n[split]\n", "x.ini").manifest_path, "m.json");
}

TEST_F(PipelineTest, MissingInputNamesTheGap) {
  const auto c = load_pipeline_config(
      write_config("[train]\nalgo = nb\nsplit = " + at("nowhere") + "\nout = " + at("m") + "\n"));
  try {
    check_dependencies(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingInput);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[train]"), std::string::npos);
    EXPECT_NE(msg.find(at("nowhere") + "/train.jsonl"), std::string::npos);
  }
  EXPECT_FALSE(file_exists(c.manifest_path));
}

TEST_F(PipelineTest, FullRunWritesManifest) {
  const auto cfg = full_config();
  const auto c = load_pipeline_config(cfg);
  EXPECT_EQ(names(c), (std::vector<std::string>{"split", "train:nb", "train:linear", "eval", "entropy"}));
  const auto m = run_pipeline(c);
  EXPECT_EQ(m["status"], "ok");
  ASSERT_EQ(m["stages"].size(), 5u);
  for (const auto& s : m["stages"]) {
    EXPECT_EQ(s["status"], "ok");
    EXPECT_EQ(s["seed"], "5");
    EXPECT_TRUE(s["deterministic"].get<bool>());
    for (const auto& o : s["outputs"]) EXPECT_EQ(o["sha256"].get<std::string>().size(), 64u);
  }
  EXPECT_GE(m["stages"][3]["summary"]["accuracy"].get<double>(), 0.9);
  const auto on_disk = nlohmann::json::parse(read_file(cfg + ".manifest.json"));
  EXPECT_EQ(on_disk["stages"].size(), 5u);
}

TEST_F(PipelineTest, RerunProducesIdenticalDigests) {
  const auto c = load_pipeline_config(full_config());
  const auto first = run_pipeline(c);
  EXPECT_THROW(run_pipeline(c), Error);  // outputs exist
  PipelineOptions force;
  force.force = true;
  const auto second = run_pipeline(c, force);
  for (std::size_t i = 0; i < first["stages"].size(); ++i) {
    EXPECT_EQ(first["stages"][i]["outputs"], second["stages"][i]["outputs"]) << first["stages"][i]["name"];
    EXPECT_EQ(first["stages"][i]["inputs"], second["stages"][i]["inputs"]);
  }
}

TEST_F(PipelineTest, SingleStageConfigRunsOneStage) {
  const auto c = load_pipeline_config(
      write_config("stages = tokenize\n[split]\nin = " + kData + "\nout = " + at("split") +
                   "\n[tokenize]\nin = " + kData + "\nout = " + at("tok.tsv") + "\n"));
  const auto m = run_pipeline(c);
  ASSERT_EQ(m["stages"].size(), 1u);
  EXPECT_EQ(m["stages"][0]["stage"], "tokenize");
  EXPECT_FALSE(fs::exists(at("split")));
  EXPECT_TRUE(file_exists(at("tok.tsv")));
}

TEST_F(PipelineTest, HaltsOnFirstFailure) {
  write_file(at("bad.jsonl"), "{\"id\": 1}\n");
  const auto c = load_pipeline_config(
      write_config("[tokenize]\nin = " + at("bad.jsonl") + "\nout = " + at("tok.tsv") +
                   "\n[split]\nin = " + at("bad.jsonl") + "\nout = " + at("split") + "\n"));
  try {
    run_pipeline(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stage [tokenize] failed"), std::string::npos) << e.what();
  }
  const auto m = nlohmann::json::parse(read_file(c.manifest_path));
  EXPECT_EQ(m["status"], "failed");
  ASSERT_EQ(m["stages"].size(), 1u);
  EXPECT_EQ(m["stages"][0]["status"], "failed");
  EXPECT_FALSE(m["stages"][0]["error"].get<std::string>().empty());
  EXPECT_FALSE(fs::exists(at("split")));
}

TEST_F(PipelineTest, DirectoryDigest) {
  fs::create_directories(at("d/sub"));
  write_file(at("d/b.txt"), "b");
  write_file(at("d/sub/a.txt"), "a");
  const std::string expected = sha256_hex("b.txt " + sha256_hex("b") + "\nsub/a.txt " + sha256_hex("a") + "\n");
  EXPECT_EQ(path_digest(at("d")), expected);
  EXPECT_EQ(path_digest(at("d/b.txt")), sha256_hex("b"));
}
