// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mmgru/binary_io.hpp"
#include "mmgru/checkpoint.hpp"
#include "mmgru/cli.hpp"
#include "support.hpp"

namespace mmgru {
namespace {

using nlohmann::json;
using testing::TempDir;

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

// A small overfit corpus on disk plus a checkpoint trained on it.
class CliFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    const auto corpus = testing::overfit_corpus(3, 6);
    save_features(path("feat.mmft"), corpus.features);
    std::string lines;
    for (const auto& e : corpus.entries) {
      lines += json{{"id", e.id}, {"captions", e.captions}}.dump() + "\n";
    }
    write_text(path("caps.jsonl"), lines);
    const Result r = run_cli({"train", "--features", path("feat.mmft"), "--captions",
                              path("caps.jsonl"), "--out", path("model.mgru"), "--hidden", "12",
                              "--epochs", "500", "--lr", "0.1", "--l2", "0", "--min-count", "1",
                              "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static TempDir* dir_;
};

TempDir* CliFixture::dir_ = nullptr;

TEST(Cli, ParamsReportsTableValues) {
  const Result r = run_cli({"params", "--hidden", "256,512,1024"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][0]["gru"], 393984);
  EXPECT_EQ(j["rows"][0]["lstm"], 525312);
  EXPECT_EQ(j["rows"][1]["gru"], 1574400);
  EXPECT_EQ(j["rows"][1]["lstm"], 2099200);
  EXPECT_EQ(j["rows"][2]["gru"], 6294528);
  for (const auto& row : j["rows"]) {
    EXPECT_LT(row["gru_2layer_feedback"].get<long>(), row["gru_2layer_conventional"].get<long>());
  }
  const Result table = run_cli({"params", "--hidden", "256", "--table"});
  EXPECT_NE(table.out.find("393,984"), std::string::npos) << table.out;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"bogus"}).code, 2);
  EXPECT_EQ(run_cli({"train", "--features", "f"}).code, 2);
  EXPECT_EQ(run_cli({"params", "--hidden", "0"}).code, 2);
  EXPECT_EQ(run_cli({"params", "--hidden", "abc"}).code, 2);
  EXPECT_EQ(run_cli({"train", "--features", "f", "--captions", "c", "--out", "o", "--layers", "3"}).code, 2);
  EXPECT_EQ(run_cli({"train", "--features", "f", "--captions", "c", "--out", "o", "--stack",
                     "conventional"}).code, 2);
  EXPECT_EQ(run_cli({"train", "--features", "f", "--captions", "c", "--out", "o", "--lr", "-1"}).code, 2);
  EXPECT_EQ(run_cli({"params", "--help"}).code, 0);
}

TEST(Cli, MissingInputFileExitsOne) {
  TempDir tmp;
  const Result r = run_cli({"train", "--features", (tmp / "none.mmft").string(), "--captions",
                            (tmp / "none.jsonl").string(), "--out", (tmp / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, ConfigFileFillsUnsetFlagsOnly) {
  TempDir tmp;
  write_text(tmp / "p.cfg", "# comment\nhidden = 64,128\ntable=true\n");
  Result r = run_cli({"params", "--config", (tmp / "p.cfg").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("64"), std::string::npos);
  EXPECT_NE(r.out.find("hidden"), std::string::npos);  // table header
  r = run_cli({"params", "--config", (tmp / "p.cfg").string(), "--hidden", "256"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("393,984"), std::string::npos);
  EXPECT_EQ(r.out.find("128"), std::string::npos);
  write_text(tmp / "bad.cfg", "nonsense=1\n");
  EXPECT_EQ(run_cli({"params", "--config", (tmp / "bad.cfg").string()}).code, 2);
}

TEST_F(CliFixture, TrainIsDeterministicAndWritesManifest) {
  const std::vector<std::string> base = {"train", "--features", path("feat.mmft"), "--captions",
                                         path("caps.jsonl"), "--hidden", "6", "--epochs", "3",
                                         "--min-count", "1", "--seed", "7", "--layers", "2"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a.mgru")});
  b.insert(b.end(), {"--out", path("b.mgru")});
  const Result ra = run_cli(a);
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(run_cli(b).code, 0);
  EXPECT_EQ(io::read_file(path("a.mgru")), io::read_file(path("b.mgru")));
  EXPECT_EQ(load_checkpoint(path("a.mgru")).params.stack_kind(), StackKind::kFeedback);

  std::istringstream lines(ra.out);
  std::string line;
  std::size_t epochs = 0;
  while (std::getline(lines, line)) epochs += json::parse(line).contains("epoch");
  EXPECT_EQ(epochs, 3u);

  std::ifstream mf(path("a.mgru") + ".manifest.json");
  const json m = json::parse(mf);
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["config"]["stack"], "feedback");
  EXPECT_EQ(m["config"]["hidden"], 6);
  EXPECT_EQ(m["config"]["lr"], 0.01);
  EXPECT_EQ(m["inputs"]["features"]["sha256"].get<std::string>().size(), 64u);
  EXPECT_TRUE(m.contains("wall_clock_seconds"));
  EXPECT_TRUE(m["final_metrics"].contains("last_epoch_mean_loss"));
}

TEST_F(CliFixture, TrainConfigPrecedence) {
  write_text(path("t.cfg"), "hidden=5\nepochs=2\nlr=0.5\n");
  const Result r = run_cli({"train", "--features", path("feat.mmft"), "--captions",
                            path("caps.jsonl"), "--out", path("c.mgru"), "--config", path("t.cfg"),
                            "--hidden", "4", "--min-count", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream mf(path("c.mgru") + ".manifest.json");
  const json m = json::parse(mf);
  EXPECT_EQ(m["config"]["hidden"], 4);
  EXPECT_EQ(m["config"]["epochs"], 2);
  EXPECT_EQ(m["config"]["lr"], 0.5);
  EXPECT_EQ(m["config"]["l2"], 1e-4);
  EXPECT_EQ(load_checkpoint(path("c.mgru")).params.hidden_size(), 4u);
}

TEST_F(CliFixture, CaptionReproducesTrainingCaptions) {
  const Result r = run_cli({"caption", "--ckpt", path("model.mgru"), "--features", path("feat.mmft")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto corpus = testing::overfit_corpus(3, 6);
  std::istringstream lines(r.out);
  std::string line;
  std::size_t i = 0;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    ASSERT_LT(i, corpus.entries.size());
    EXPECT_EQ(j["id"], corpus.entries[i].id);
    EXPECT_EQ(j["caption"], corpus.entries[i].captions[0]);
    ++i;
  }
  EXPECT_EQ(i, 3u);
}

TEST_F(CliFixture, CaptionMaxLenAndEmptyInput) {
  Result r = run_cli({"caption", "--ckpt", path("model.mgru"), "--features", path("feat.mmft"),
                      "--max-len", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    const std::string cap = json::parse(line)["caption"];
    EXPECT_EQ(cap.find(' '), std::string::npos) << cap;
  }
  FeatureFile empty;
  empty.dim = 6;
  save_features(path("empty.mmft"), empty);
  r = run_cli({"caption", "--ckpt", path("model.mgru"), "--features", path("empty.mmft")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliFixture, CaptionDimensionMismatchExitsOne) {
  FeatureFile f;
  f.dim = 4;
  f.vectors.emplace("x", Vector{1, 2, 3, 4});
  save_features(path("wrong.mmft"), f);
  const Result r = run_cli({"caption", "--ckpt", path("model.mgru"), "--features", path("wrong.mmft")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("does not match"), std::string::npos) << r.err;
}

TEST_F(CliFixture, EvalReportSchema) {
  Result r = run_cli({"eval", "--ckpt", path("model.mgru"), "--features", path("feat.mmft"),
                      "--captions", path("caps.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  for (const char* key : {"B-1", "B-2", "B-3", "B-4", "METEOR", "CIDEr"}) {
    EXPECT_TRUE(j["metrics"].contains(key)) << key;
  }
  // The overfit model reproduces every reference, so BLEU is perfect.
  for (const char* key : {"B-1", "B-2", "B-3", "B-4"}) EXPECT_DOUBLE_EQ(j["metrics"][key].get<double>(), 1.0);
  EXPECT_EQ(j["per_sentence"].size(), 3u);
  EXPECT_TRUE(j.contains("manifest"));

  r = run_cli({"eval", "--ckpt", path("model.mgru"), "--features", path("feat.mmft"), "--captions",
               path("caps.jsonl"), "--metrics", "bleu", "--manifest", path("eval.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_EQ(j["metrics"].size(), 4u);
  EXPECT_FALSE(j["metrics"].contains("METEOR"));
  EXPECT_FALSE(j.contains("manifest"));
  std::ifstream mf(path("eval.json"));
  EXPECT_EQ(json::parse(mf)["command"], "eval");
  EXPECT_EQ(run_cli({"eval", "--ckpt", path("model.mgru"), "--features", path("feat.mmft"),
                     "--captions", path("caps.jsonl"), "--metrics", "rouge"}).code, 2);
}

TEST_F(CliFixture, RetrieveReportsBothDirections) {
  Result r = run_cli({"retrieve", "--ckpt", path("model.mgru"), "--features", path("feat.mmft"),
                      "--captions", path("caps.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["k"], json({1, 5, 10}));
  EXPECT_EQ(j["medr_mode"], "mean_of_medians");
  for (const char* dir : {"sentence_retrieval", "image_retrieval"}) {
    ASSERT_TRUE(j.contains(dir));
    for (const char* key : {"R@1", "R@5", "R@10", "Med-r"}) EXPECT_TRUE(j[dir].contains(key));
    EXPECT_EQ(j[dir]["R@1"], 1.0);
    EXPECT_EQ(j[dir]["Med-r"], 1.0);
  }
  r = run_cli({"retrieve", "--ckpt", path("model.mgru"), "--features", path("feat.mmft"),
               "--captions", path("caps.jsonl"), "--direction", "i2s", "--medr", "conventional",
               "--score", "raw"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_TRUE(j.contains("sentence_retrieval"));
  EXPECT_FALSE(j.contains("image_retrieval"));
  EXPECT_EQ(j["medr_mode"], "median_of_best");
  EXPECT_EQ(j["score_mode"], "raw");
  EXPECT_EQ(run_cli({"retrieve", "--ckpt", path("model.mgru"), "--features", path("feat.mmft"),
                     "--captions", path("caps.jsonl"), "--direction", "up"}).code, 2);
}

TEST_F(CliFixture, RepeatedEvalGivesIdenticalMetrics) {
  const std::vector<std::string> args{"eval", "--ckpt", path("model.mgru"), "--features",
                                      path("feat.mmft"), "--captions", path("caps.jsonl")};
  const json a = json::parse(run_cli(args).out), b = json::parse(run_cli(args).out);
  EXPECT_EQ(a["metrics"], b["metrics"]);
  EXPECT_EQ(a["per_sentence"], b["per_sentence"]);
}

TEST(Cli, ScoreCommand) {
  TempDir tmp;
  write_text(tmp / "s.jsonl",
             "{\"id\": \"a\", \"hyp\": \"The cat the cat\", \"refs\": [\"the cat sat\"]}\n"
             "{\"id\": \"b\", \"hyp\": \"a dog\", \"refs\": [\"a dog\"]}\n");
  const Result r = run_cli({"score", "--input", (tmp / "s.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["metrics"]["B-1"].get<double>(), 4.0 / 6.0);
  write_text(tmp / "bad.jsonl", "{\"hyp\": 3}\n");
  const Result bad = run_cli({"score", "--input", (tmp / "bad.jsonl").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("line 1"), std::string::npos) << bad.err;
}

}  // namespace
}  // namespace mmgru
