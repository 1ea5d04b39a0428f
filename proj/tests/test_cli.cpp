// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hogfusion/cli.hpp"
#include "hogfusion/pipeline.hpp"
#include "hogfusion/synthetic.hpp"
#include "hogfusion/trainer.hpp"

namespace fs = std::filesystem;
using namespace hogfusion;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "hogfusion");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);) out.push_back(line);
  return out;
}

/// One small synthetic dataset and a short-training config shared by the suite.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("hogfusion_cli_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    const CliRun r = run({"synth", "--out", (root_ / "data").string(), "--count", "60", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    json cfg = json::parse(slurp(root_ / "data" / "config.json"));
    cfg["train"]["epochs"] = 15;
    cfg["train"]["patience"] = 0;
    cfg["train"]["batch_size"] = 16;
    cfg["model"]["hog_hidden"] = {64, 32, 16};
    cfg["model"]["head_hidden"] = {32, 16};
    cfg["model"]["head_conv_filters"] = 8;
    cfg["model"]["cnn_embed_dim"] = 16;
    std::ofstream(root_ / "config.json") << cfg.dump(2);
    // manifests written under root_ keep the relative images/ paths, which
    // resolve against the manifest's own directory
    fs::copy(root_ / "data" / "images", root_ / "images", fs::copy_options::recursive);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string data(const std::string& name) { return (root_ / "data" / name).string(); }
  static std::string path(const std::string& name) { return (root_ / name).string(); }

  static std::string features() {
    static bool done = false;
    if (!done) {
      const CliRun r = run({"extract-hog", "--manifest", data("manifest.csv"), "--config", path("config.json"),
                            "--out", path("hog.csv")});
      EXPECT_EQ(r.code, 0) << r.err;
      done = true;
    }
    return path("hog.csv");
  }

  static fs::path root_;
};

fs::path CliTest::root_;

}  // namespace

TEST(CliUsage, UnknownSubcommandAndMissingArguments) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"predict"}).code, 2);  // --checkpoint is required
  EXPECT_EQ(run({"train", "--task", "ternary"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliUsage, RuntimeErrorsExitOne) {
  const CliRun r = run({"train", "--manifest", "/nonexistent/manifest.csv", "--out", "/tmp/x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("not found"), std::string::npos) << r.err;
}

TEST_F(CliTest, ExtractHogWritesOneRowPerImage) {
  // three-image manifest
  const auto all = lines_of(data("manifest.csv"));
  {
    std::ofstream m(path("three.csv"));
    m << all[0] << "\n";
    for (int i = 1; i <= 3; ++i) m << all[static_cast<std::size_t>(i)] << "\n";
  }
  const CliRun r = run({"extract-hog", "--manifest", path("three.csv"), "--config", path("config.json"), "--out",
                        path("three_hog.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fm = hog::import_feature_matrix(path("three_hog.csv"));
  EXPECT_EQ(fm.size(), 3u);
  EXPECT_EQ(fm.dim, 324u);
  EXPECT_EQ(fm.ids[0], "syn0000");
}

TEST_F(CliTest, ExtractHogFailsWithoutSkipBad) {
  {
    std::ofstream m(path("bad.csv"));
    m << "id,path,label\n";
    m << "a," << data("images/syn0000.png") << ",0\n";
    m << "b," << path("missing.png") << ",1\n";
  }
  const CliRun r = run({"extract-hog", "--manifest", path("bad.csv"), "--out", path("bad_hog.csv")});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(fs::exists(path("bad_hog.csv")));
  EXPECT_NE(r.err.find("b:"), std::string::npos) << r.err;

  const CliRun s = run({"extract-hog", "--manifest", path("bad.csv"), "--out", path("bad_hog.csv"), "--skip-bad"});
  EXPECT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(hog::import_feature_matrix(path("bad_hog.csv")).size(), 1u);
}

TEST_F(CliTest, TrainWritesArtifactsAndRerunsIdentically) {
  const auto args = [&](const std::string& out) {
    return std::vector<std::string>{"train",    "--manifest", data("manifest.csv"), "--features", features(),
                                    "--config", path("config.json"), "--out", path(out), "--seed", "5"};
  };
  const CliRun a = run(args("train_a"));
  ASSERT_EQ(a.code, 0) << a.err;
  for (const char* f : {"checkpoint.bin", "history.csv", "report.json", "report.txt", "roc.csv", "split.txt",
                        "run.json"})
    EXPECT_TRUE(fs::exists(fs::path(path("train_a")) / f)) << f;
  EXPECT_EQ(lines_of(fs::path(path("train_a")) / "history.csv").size(), 16u);
  const auto report = json::parse(slurp(fs::path(path("train_a")) / "report.json"));
  EXPECT_EQ(report["samples"], 12);  // 20% of 60
  EXPECT_EQ(report["averaging"], "macro");

  const CliRun b = run(args("train_b"));
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"checkpoint.bin", "history.csv", "report.json", "report.txt", "roc.csv", "split.txt"})
    EXPECT_EQ(slurp(fs::path(path("train_a")) / f), slurp(fs::path(path("train_b")) / f)) << f;
  for (const auto& e : fs::directory_iterator(path("train_a")))
    EXPECT_NE(e.path().extension(), ".tmp") << e.path();
}

TEST_F(CliTest, EvalOnTrainedModel) {
  const CliRun t = run({"train", "--manifest", data("manifest.csv"), "--features", features(), "--config",
                        path("config.json"), "--out", path("train_eval")});
  ASSERT_EQ(t.code, 0) << t.err;
  const CliRun e = run({"eval", "--checkpoint", path("train_eval/checkpoint.bin"), "--manifest",
                        data("manifest.csv"), "--features", features(), "--out", path("eval")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("accuracy=1.000000"), std::string::npos) << e.out;
  EXPECT_TRUE(fs::exists(path("eval/eval_report.json")));
  EXPECT_TRUE(fs::exists(path("eval/eval_roc.csv")));

  const CliRun p = run({"predict", "--checkpoint", path("train_eval/checkpoint.bin"), "--image",
                        data("images/syn0001.png")});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NE(p.out.find("class=1"), std::string::npos) << p.out;
  EXPECT_NE(p.out.find("prob[0]="), std::string::npos);

  const CliRun wrong = run({"eval", "--checkpoint", path("train_eval/checkpoint.bin"), "--manifest",
                            data("manifest.csv"), "--features", features(), "--task", "multiclass"});
  EXPECT_EQ(wrong.code, 1);
}

TEST_F(CliTest, CrossValidationWritesFiveFoldsAndMean) {
  const CliRun r = run({"cv", "--manifest", data("manifest.csv"), "--features", features(), "--config",
                        path("config.json"), "--out", path("cv"), "--k", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(path("cv/cv_report.json")));
  ASSERT_EQ(j["folds"].size(), 5u);
  double acc = 0.0;
  for (const auto& f : j["folds"]) acc += f["accuracy"].get<double>();
  EXPECT_NEAR(j["mean"]["accuracy"].get<double>(), acc / 5.0, 1e-12);
  EXPECT_TRUE(fs::exists(path("cv/folds.txt")));
  EXPECT_TRUE(fs::exists(path("cv/run.json")));
}

TEST_F(CliTest, PredictReportsTies) {
  auto cfg = pipeline::load_run_config(path("config.json"));
  cfg.model.branches = model::Branches::HogOnly;
  auto m = model::FusionModel::build(cfg.model, 1);
  m.params().get("out.W").fill(0.0f);
  m.params().get("out.b").fill(0.0f);
  train::save_checkpoint(m, {}, json{{"run", cfg}, {"task", "binary"}}, path("tie.ckpt"));
  const CliRun r = run({"predict", "--checkpoint", path("tie.ckpt"), "--features", features(), "--id", "syn0003"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("class=0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("prob[0]=0.5"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("tie"), std::string::npos) << r.out;

  const CliRun missing = run({"predict", "--checkpoint", path("tie.ckpt"), "--features", features(), "--id", "nope"});
  EXPECT_EQ(missing.code, 1);
}

TEST_F(CliTest, BinaryTaskMergesGrades) {
  // relabel the synthetic images with five grades, 12 per grade
  const auto all = lines_of(data("manifest.csv"));
  {
    std::ofstream m(path("graded.csv"));
    m << "id,path,label\n";
    for (std::size_t i = 1; i < all.size(); ++i) {
      const auto comma = all[i].rfind(',');
      m << all[i].substr(0, comma) << "," << (i - 1) % 5 << "\n";
    }
  }
  const CliRun b = run({"extract-hog", "--manifest", path("graded.csv"), "--config", path("config.json"), "--out",
                        path("graded_hog.csv"), "--task", "binary"});
  ASSERT_EQ(b.code, 0) << b.err;
  const CliRun t = run({"train", "--manifest", path("graded.csv"), "--features", path("graded_hog.csv"), "--config",
                        path("config.json"), "--out", path("graded_bin"), "--task", "binary"});
  ASSERT_EQ(t.code, 0) << t.err;
  const auto report = json::parse(slurp(path("graded_bin/report.json")));
  EXPECT_EQ(report["per_class"].size(), 2u);
  // grade 0 is 12 of 60, so the 20% test split holds 2-3 negatives and 9-10 positives
  const long neg = report["per_class"][0]["support"].get<long>();
  EXPECT_GE(neg, 2);
  EXPECT_LE(neg, 3);

  const CliRun mc = run({"train", "--manifest", path("graded.csv"), "--features", path("graded_hog.csv"), "--config",
                         path("config.json"), "--out", path("graded_mc"), "--task", "multiclass"});
  ASSERT_EQ(mc.code, 0) << mc.err;
  EXPECT_EQ(json::parse(slurp(path("graded_mc/report.json")))["per_class"].size(), 5u);
}
