// Copyright 2026 The Panoptic Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "panoptic/io.h"
#include "test_support.h"

namespace panoptic {
namespace {

using testing::ScratchDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome RunCli(const ScratchDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(PANOPTIC_CLI) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = ReadTextFile(out);
  o.err = ReadTextFile(err);
  return o;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new ScratchDir("cli");
    const Outcome o =
        RunCli(*data_, "synth --output-dir " + data_->path().string() +
                        " --count 6 --width 64 --height 48 --seed 3"
                        " --crowd 0.2 --void 0.05 --drop 1 --spurious 1");
    ASSERT_EQ(o.code, 0) << o.err;
  }
  static void TearDownTestSuite() {
    delete data_;
    data_ = nullptr;
  }

  std::string DataArgs() const {
    return "--gt-dir " + (*data_ / "gt").string() + " --pred-dir " +
           (*data_ / "pred").string() + " --categories " +
           (*data_ / "categories.json").string();
  }

  static ScratchDir* data_;
  ScratchDir work_{"cli_work"};
};

ScratchDir* CliTest::data_ = nullptr;

TEST_F(CliTest, EvaluateWritesReportAndSummary) {
  const auto report = work_ / "r.json";
  const Outcome o =
      RunCli(work_, "evaluate " + DataArgs() + " --output " + report.string());
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("images: 6"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("Things"), std::string::npos);
  EXPECT_NE(ReadTextFile(report).find("\"classes\""), std::string::npos);
}

TEST_F(CliTest, ReportIsByteIdenticalAcrossThreadCounts) {
  std::string reference;
  for (int t : {1, 2, 8}) {
    const auto report = work_ / ("r" + std::to_string(t) + ".csv");
    const Outcome o = RunCli(work_, "evaluate " + DataArgs() + " --threads " +
                                     std::to_string(t) + " --output " +
                                     report.string());
    ASSERT_EQ(o.code, 0) << o.err;
    const std::string text = ReadTextFile(report);
    if (reference.empty()) reference = text;
    EXPECT_EQ(text, reference) << "threads " << t;
  }
  std::string boot_ref;
  for (int t : {1, 4}) {
    const auto csv = work_ / "b.csv";
    const Outcome o =
        RunCli(work_, "bootstrap " + DataArgs() + " --resamples 100 --seed 5" +
                       " --threads " + std::to_string(t) + " --output " +
                       csv.string());
    ASSERT_EQ(o.code, 0) << o.err;
    if (boot_ref.empty()) boot_ref = ReadTextFile(csv);
    EXPECT_EQ(ReadTextFile(csv), boot_ref);
  }
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  const auto config = work_ / "run.json";
  WriteTextFile(config, "{\"gt_dir\": \"" + (*data_ / "gt").string() +
                            "\", \"pred_dir\": \"" +
                            (*data_ / "pred").string() +
                            "\", \"categories\": \"" +
                            (*data_ / "categories.json").string() +
                            "\", \"iou_threshold\": 0.6}");
  const auto a = work_ / "a.csv";
  const auto b = work_ / "b.csv";
  ASSERT_EQ(RunCli(work_, "evaluate --config " + config.string() + " --output " +
                           a.string())
                .code,
            0);
  ASSERT_EQ(RunCli(work_, "evaluate " + DataArgs() +
                           " --iou-threshold 0.6 --output " + b.string())
                .code,
            0);
  EXPECT_EQ(ReadTextFile(a), ReadTextFile(b));
  const auto c = work_ / "c.csv";
  ASSERT_EQ(RunCli(work_, "evaluate --config " + config.string() +
                           " --iou-threshold 0.5 --output " + c.string())
                .code,
            0);
  const auto d = work_ / "d.csv";
  ASSERT_EQ(RunCli(work_, "evaluate " + DataArgs() + " --output " + d.string())
                .code,
            0);
  EXPECT_EQ(ReadTextFile(c), ReadTextFile(d));

  WriteTextFile(work_ / "bad.json", "{\"threds\": 2}");
  EXPECT_EQ(RunCli(work_, "evaluate --config " + (work_ / "bad.json").string())
                .code,
            2);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(RunCli(work_, "").code, 1);
  EXPECT_EQ(RunCli(work_, "frobnicate").code, 1);
  EXPECT_EQ(RunCli(work_, "evaluate --pred-dir x").code, 1);
  EXPECT_EQ(RunCli(work_, "evaluate " + DataArgs() + " --iou-threshold 1").code,
            1);
  EXPECT_EQ(RunCli(work_, "evaluate " + DataArgs() + " --threads 0").code, 1);
  EXPECT_EQ(RunCli(work_, "evaluate " + DataArgs() + " --format xml").code, 1);
  EXPECT_EQ(RunCli(work_, "sweep " + DataArgs() + " --thresholds 0.5,abc").code,
            1);
  EXPECT_EQ(RunCli(work_, "bootstrap " + DataArgs() + " --resamples 0").code, 1);
  const Outcome help = RunCli(work_, "--help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("evaluate"), std::string::npos);
  EXPECT_EQ(RunCli(work_, "--version").code, 0);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  EXPECT_EQ(RunCli(work_, "evaluate --gt-dir " + (work_ / "none").string() +
                           " --pred-dir " + (work_ / "none").string() +
                           " --categories " +
                           (*data_ / "categories.json").string())
                .code,
            2);

  // A prediction whose raster holds an id missing from its sidecar.
  std::filesystem::create_directories(work_ / "gt");
  std::filesystem::create_directories(work_ / "pred");
  for (const char* ext : {".png", ".json"}) {
    std::filesystem::copy_file(*data_ / "gt" / (std::string("img_0000") + ext),
                               work_ / "gt" / (std::string("a") + ext));
  }
  std::filesystem::copy_file(*data_ / "gt" / "img_0000.png",
                             work_ / "pred" / "a.png");
  WriteTextFile(work_ / "pred" / "a.json",
                "{\"segments_info\": [{\"id\": 1, \"category_id\": 1}]}");
  const std::string args = "evaluate --gt-dir " + (work_ / "gt").string() +
                           " --pred-dir " + (work_ / "pred").string() +
                           " --categories " +
                           (*data_ / "categories.json").string();
  const Outcome orphan = RunCli(work_, args);
  EXPECT_EQ(orphan.code, 2);
  EXPECT_NE(orphan.err.find("sidecar"), std::string::npos) << orphan.err;

  // Instances with an RLE whose runs do not cover the image.
  WriteTextFile(work_ / "inst.json",
                "[{\"category_id\": 3, \"score\": 0.9, "
                "\"segmentation\": {\"size\": [2, 2], \"counts\": [1, 1]}}]");
  const Outcome rle =
      RunCli(work_, "resolve --instances " + (work_ / "inst.json").string() +
                     " --width 2 --height 2 --categories " +
                     (*data_ / "categories.json").string() + " --output " +
                     (work_ / "out").string());
  EXPECT_EQ(rle.code, 2) << rle.err;
}

TEST_F(CliTest, MissingPredictionWarnsAndScoresFalseNegatives) {
  std::filesystem::create_directories(work_ / "pred");
  const Outcome o =
      RunCli(work_, "evaluate --gt-dir " + (*data_ / "gt").string() +
                     " --pred-dir " + (work_ / "pred").string() +
                     " --categories " + (*data_ / "categories.json").string());
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.err.find("warning: no prediction for img_0000"),
            std::string::npos);
}

TEST_F(CliTest, SweepCdfAndFusion) {
  const auto sweep = work_ / "s.csv";
  ASSERT_EQ(RunCli(work_, "sweep " + DataArgs() + " --output " + sweep.string())
                .code,
            0);
  const std::string text = ReadTextFile(sweep);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  ASSERT_EQ(RunCli(work_, "cdf " + DataArgs() + " --output " +
                           (work_ / "c.csv").string())
                .code,
            0);

  const Outcome synth =
      RunCli(work_, "synth --output-dir " + (work_ / "f").string() +
                     " --count 1 --width 40 --height 30 --fusion");
  ASSERT_EQ(synth.code, 0) << synth.err;
  const auto fusion = work_ / "f" / "fusion";
  const Outcome fuse = RunCli(
      work_, "fuse --instances " + (fusion / "img_0000_instances.json").string() +
                 " --semantic " + (fusion / "img_0000_semantic.png").string() +
                 " --categories " + (work_ / "f" / "categories.json").string() +
                 " --output " + (work_ / "fused").string());
  ASSERT_EQ(fuse.code, 0) << fuse.err;
  EXPECT_TRUE(std::filesystem::exists(work_ / "fused.png"));
  EXPECT_TRUE(std::filesystem::exists(work_ / "fused.json"));
}

}  // namespace
}  // namespace panoptic
