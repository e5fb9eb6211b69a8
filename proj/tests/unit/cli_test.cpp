// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "cocoaan/checkpoint.hpp"
#include "test_util.hpp"

namespace cocoaan {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "cocoaan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const std::vector<std::string> kTiny = {"--code-dim", "8", "--width-mult", "0.015625",
                                        "--batch-size", "4"};

std::vector<std::string> train_args(const fs::path& data, const fs::path& out, int iterations) {
  std::vector<std::string> a = {"train", "--data", data.string(), "--out", out.string(),
                                "--iterations", std::to_string(iterations)};
  a.insert(a.end(), kTiny.begin(), kTiny.end());
  return a;
}

class CliWorkflow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    const Result r = run({"synth-data", "--out", data().string(), "--n-styles", "4",
                          "--n-contents", "5", "--resolution", "16", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Result t = run(train_args(data(), run_dir(), 3));
    ASSERT_EQ(t.code, 0) << t.err;
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path root() { return dir_->path(); }
  static fs::path data() { return root() / "data"; }
  static fs::path run_dir() { return root() / "run"; }
  static fs::path ckpt() { return run_dir() / "final.bin"; }

  static testing::TempDir* dir_;
};

testing::TempDir* CliWorkflow::dir_ = nullptr;

TEST_F(CliWorkflow, SynthWritesLayoutManifestAndConfig) {
  EXPECT_TRUE(fs::exists(data() / "s000" / "c000.png"));
  EXPECT_TRUE(fs::exists(data() / "s003" / "c004.png"));
  EXPECT_EQ(line_count(data() / "manifest.csv"), 10u);  // header, 4 styles, 5 contents
  EXPECT_NE(slurp(data() / "synth.cfg").find("config_version = 1"), std::string::npos);
}

TEST_F(CliWorkflow, IngestReportsCounts) {
  const Result r = run({"ingest", "--data", data().string(), "--manifest",
                        (root() / "m.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("4 styles, 5 contents, 16px"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(root() / "m.csv"), slurp(data() / "manifest.csv"));
}

TEST_F(CliWorkflow, TrainWritesMetricsAndConfig) {
  EXPECT_EQ(line_count(run_dir() / "metrics.csv"), 4u);
  const std::string cfg = slurp(run_dir() / "train.cfg");
  EXPECT_NE(cfg.find("resolution = 16"), std::string::npos);
  EXPECT_NE(cfg.find("code_dim = 8"), std::string::npos);
  EXPECT_EQ(load_checkpoint(ckpt()).iteration, 3);
}

TEST_F(CliWorkflow, ResumeAppendsAndMatchesUninterruptedRun) {
  const fs::path a = root() / "resume_a";
  const fs::path b = root() / "resume_b";
  ASSERT_EQ(run(train_args(data(), a, 2)).code, 0);
  auto resume = train_args(data(), a, 4);
  resume.push_back("--resume");
  resume.push_back((a / "final.bin").string());
  const Result r = run(resume);
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(run(train_args(data(), b, 4)).code, 0);
  EXPECT_EQ(line_count(a / "metrics.csv"), 5u);
  EXPECT_EQ(encode_checkpoint(load_checkpoint(a / "final.bin")),
            encode_checkpoint(load_checkpoint(b / "final.bin")));

  auto changed = resume;
  changed.push_back("--lr-g");
  changed.push_back("0.5");
  EXPECT_EQ(run(changed).code, cli::kConfigError);
}

TEST_F(CliWorkflow, ReconstructWritesReport) {
  const Result r = run({"reconstruct", "--checkpoint", ckpt().string(), "--data",
                        data().string(), "--out", (root() / "recon").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(root() / "recon" / "report.csv").rfind("style_id,content_id,l1,image\n", 0), 0u);
  EXPECT_GT(line_count(root() / "recon" / "report.csv"), 1u);
  EXPECT_TRUE(fs::is_directory(root() / "recon" / "images"));
}

TEST_F(CliWorkflow, ExportEmbeddingsIsRepeatable) {
  const fs::path a = root() / "s1.csv", b = root() / "s2.csv";
  ASSERT_EQ(run({"export-embeddings", "--checkpoint", ckpt().string(), "--role", "style", "--out",
                 a.string()}).code, 0);
  ASSERT_EQ(run({"export-embeddings", "--checkpoint", ckpt().string(), "--role", "style", "--out",
                 b.string()}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(line_count(a), load_checkpoint(ckpt()).z_s.size());
  EXPECT_EQ(run({"export-embeddings", "--checkpoint", ckpt().string(), "--role", "glyph",
                 "--out", a.string()}).code,
            cli::kConfigError);
}

TEST_F(CliWorkflow, InterpolateWritesFrames) {
  const TrainState st = load_checkpoint(ckpt());
  const std::string s_a = st.manifest.style_labels.at(static_cast<std::size_t>(st.z_s.entries().begin()->first));
  const std::string s_b = st.manifest.style_labels.at(static_cast<std::size_t>(st.z_s.entries().rbegin()->first));
  const std::string c = st.manifest.content_labels.at(static_cast<std::size_t>(st.z_c.entries().begin()->first));
  const fs::path out = root() / "interp";
  const Result r = run({"interpolate", "--checkpoint", ckpt().string(), "--style-a", s_a,
                        "--style-b", s_b, "--content", c, "--steps", "3", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "frame_000.png"));
  EXPECT_TRUE(fs::exists(out / "frame_002.png"));
  EXPECT_FALSE(fs::exists(out / "frame_003.png"));
  EXPECT_EQ(run({"interpolate", "--checkpoint", ckpt().string(), "--style-a", "nope",
                 "--style-b", s_b, "--content", c, "--out", out.string()}).code,
            cli::kDataError);
  EXPECT_EQ(run({"interpolate", "--checkpoint", ckpt().string(), "--style-a", s_a, "--style-b",
                 s_b, "--content", c, "--steps", "1", "--out", out.string()}).code,
            cli::kConfigError);
}

TEST_F(CliWorkflow, NewStyleFromGlyphFolder) {
  const fs::path out = root() / "newstyle";
  const Result r = run({"new-style", "--checkpoint", ckpt().string(), "--glyphs",
                        (data() / "s002").string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(out / "style_code.csv"), 1u);
}

TEST_F(CliWorkflow, NewContentFromGlyphFolders) {
  const TrainState st = load_checkpoint(ckpt());
  const fs::path glyphs = root() / "newcontent_in";
  for (const auto& [id, code] : st.z_s.entries()) {
    const std::string label = st.manifest.style_labels.at(static_cast<std::size_t>(id));
    fs::create_directories(glyphs / label);
    fs::copy_file(data() / label / "c001.png", glyphs / label / "x_new.png");
  }
  const fs::path out = root() / "newcontent";
  const Result r = run({"new-content", "--checkpoint", ckpt().string(), "--glyphs",
                        glyphs.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out / "content_codes.csv");
  EXPECT_NE(csv.find("x_new"), std::string::npos) << csv;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
  EXPECT_EQ(run({}).code, cli::kConfigError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kConfigError);
  testing::TempDir dir("cli_codes");
  EXPECT_EQ(run({"synth-data", "--out", dir.path().string(), "--n-styles", "1"}).code,
            cli::kConfigError);
  EXPECT_EQ(run({"synth-data", "--out", dir.path().string(), "--n-styles", "two"}).code,
            cli::kConfigError);
  EXPECT_EQ(run({"ingest", "--data", (dir.path() / "missing").string()}).code, cli::kDataError);
  EXPECT_EQ(run({"export-embeddings", "--checkpoint", (dir.path() / "none.bin").string(),
                 "--out", (dir.path() / "x.csv").string()}).code,
            cli::kDataError);

  const fs::path cfg = dir.path() / "bad.cfg";
  std::ofstream(cfg) << "config_version = 1\nno_such_key = 3\n";
  EXPECT_EQ(run({"synth-data", "--out", dir.path().string(), "--config", cfg.string()}).code,
            cli::kConfigError);
}

}  // namespace
}  // namespace cocoaan
