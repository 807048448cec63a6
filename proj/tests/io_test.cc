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

#include "panoptic/io.h"

#include <gtest/gtest.h>

#include <random>

#include "panoptic/status.h"
#include "test_support.h"

namespace panoptic {
namespace {

using testing::Draw;
using testing::ScratchDir;
using testing::SmallRegistry;

// A 2x2 raster with ids 1, 2, 2, `last` and the given sidecar body.
EncodedPanoptic Encoded(uint32_t last, const std::string& segments,
                        int width = 2, int height = 2) {
  EncodedPanoptic e;
  e.width = width;
  e.height = height;
  const uint32_t ids[4] = {1, 2, 2, last};
  for (uint32_t id : ids) {
    e.rgb.push_back(id & 0xff);
    e.rgb.push_back((id >> 8) & 0xff);
    e.rgb.push_back((id >> 16) & 0xff);
  }
  e.sidecar = "{\"width\": " + std::to_string(width) + ", \"height\": " +
              std::to_string(height) + ", \"segments_info\": [" + segments +
              "]}";
  return e;
}

const char* kTwoSegments =
    R"({"id": 1, "category_id": 1, "iscrowd": 0},
       {"id": 2, "category_id": 3, "instance_id": 4, "iscrowd": 1})";

TEST(PanopticCodecTest, DecodesHandWrittenPair) {
  const PanopticMap m = DecodePanoptic(Encoded(0, kTwoSegments), SmallRegistry());
  EXPECT_EQ(m.at(0, 0), (SegmentKey{1, 0}));
  EXPECT_EQ(m.at(1, 0), (SegmentKey{3, 4}));
  EXPECT_TRUE(m.at(1, 1).is_void());
  EXPECT_TRUE(m.IsCrowd({3, 4}));
}

TEST(PanopticCodecTest, NumbersThingsWithoutInstanceIds) {
  const EncodedPanoptic e = Encoded(
      3,
      R"({"id": 1, "category_id": 4}, {"id": 3, "category_id": 4},
         {"id": 2, "category_id": 4, "iscrowd": false})");
  const PanopticMap m = DecodePanoptic(e, SmallRegistry());
  EXPECT_EQ(m.at(0, 0), (SegmentKey{4, 1}));
  EXPECT_EQ(m.at(1, 0), (SegmentKey{4, 2}));
  EXPECT_EQ(m.at(1, 1), (SegmentKey{4, 3}));
}

TEST(PanopticCodecTest, RejectsMalformedPairs) {
  const ClassRegistry r = SmallRegistry();
  auto rejects = [&](const EncodedPanoptic& e, const std::string& needle) {
    try {
      DecodePanoptic(e, r);
      ADD_FAILURE() << "accepted; expected error containing " << needle;
    } catch (const FormatError& err) {
      EXPECT_NE(std::string(err.what()).find(needle), std::string::npos)
          << err.what();
    }
  };
  rejects(Encoded(7, kTwoSegments), "without sidecar entry: 7");
  rejects(Encoded(0, std::string(kTwoSegments) +
                         R"(, {"id": 9, "category_id": 2})"),
          "absent from raster: 9");
  rejects(Encoded(0, R"({"id": 1, "category_id": 1},
                        {"id": 1, "category_id": 2})"),
          "duplicate segment id");
  rejects(Encoded(0, R"({"id": 1, "category_id": 1},
                        {"id": 2, "category_id": 66})"),
          "unknown category_id");
  rejects(Encoded(0, R"({"id": 1, "category_id": 1, "iscrowd": 1},
                        {"id": 2, "category_id": 2})"),
          "crowd flag on stuff");
  rejects(Encoded(0, R"({"id": 1, "category_id": 1},
                        {"id": 2, "category_id": 2, "iscrowd": 3})"),
          "iscrowd");
  rejects(Encoded(0, R"({"id": 0, "category_id": 1})"), "\"id\"");
  rejects(Encoded(0, R"({"id": 1, "category_id": 3, "instance_id": 2},
                        {"id": 2, "category_id": 3, "instance_id": 2})"),
          "");
  EncodedPanoptic wrong_size = Encoded(0, kTwoSegments);
  wrong_size.sidecar = R"({"width": 3, "height": 2, "segments_info": []})";
  rejects(wrong_size, "dimension mismatch");
  EncodedPanoptic bad_json = Encoded(0, kTwoSegments);
  bad_json.sidecar = "{";
  rejects(bad_json, "invalid JSON");
}

TEST(PanopticCodecTest, EncodeIsCanonical) {
  const PanopticMap m = Draw({"ab.", "bcc"},
                             {{'a', {3, 9}}, {'b', {1, 0}}, {'c', {3, 2}}},
                             {{3, 2}});
  const EncodedPanoptic e = EncodePanoptic(m);
  EXPECT_EQ(e.rgb[0], 1);
  EXPECT_EQ(e.rgb[3], 2);
  EXPECT_EQ(e.rgb[6], 0);
  EXPECT_EQ(e.rgb[15], 3);
  EXPECT_EQ(DecodePanoptic(e, SmallRegistry()), m);
  EXPECT_EQ(EncodePanoptic(m).sidecar, e.sidecar);
}

TEST(PanopticFileTest, RoundTripsRandomMaps) {
  ScratchDir dir("io");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const PanopticMap m = testing::RandomMap(rng, 1 + i % 17, 1 + i % 13,
                                             1 + i % 9, true);
    const auto pair = PanopticFilePair::ForStem(dir.path(), "m");
    WritePanoptic(m, pair);
    EXPECT_EQ(ReadPanoptic(pair, SmallRegistry()), m) << "map " << i;
  }
}

TEST(PanopticFileTest, ErrorsNameTheFile) {
  ScratchDir dir("io");
  const auto pair = PanopticFilePair::ForStem(dir.path(), "x");
  EXPECT_EQ(pair.raster_path, dir.path() / "x.png");
  EXPECT_EQ(pair.sidecar_path, dir.path() / "x.json");
  EXPECT_THROW(ReadPanoptic(pair, SmallRegistry()), IoError);
  WritePanoptic(Draw({"a"}, {{'a', {1, 0}}}), pair);
  WriteTextFile(pair.sidecar_path, R"({"segments_info": [{"id": 1}]})");
  try {
    ReadPanoptic(pair, SmallRegistry());
    ADD_FAILURE();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("x.json"), std::string::npos);
  }
  WriteTextFile(pair.raster_path, "not a png");
  EXPECT_THROW(ReadPanoptic(pair, SmallRegistry()), FormatError);
}

TEST(RegistryIoTest, ParsesBothLayoutsAndRoundTrips) {
  const ClassRegistry a = ParseClassRegistry(
      R"([{"id": 2, "name": "grass", "isthing": 0},
          {"id": 5, "name": "dog", "isthing": 1}])");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_TRUE(a.IsThing(5));
  const ClassRegistry b = ParseClassRegistry(
      R"({"categories": [{"id": 7, "isthing": true}]})");
  EXPECT_TRUE(b.IsThing(7));
  ScratchDir dir("reg");
  WriteClassRegistry(a, dir / "c.json");
  const ClassRegistry c = ReadClassRegistry(dir / "c.json");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.Find(2)->name, "grass");
  EXPECT_TRUE(c.IsThing(5));
}

TEST(RegistryIoTest, RejectsBadRegistries) {
  EXPECT_THROW(ParseClassRegistry("[{\"id\": 0, \"isthing\": 0}]"),
               FormatError);
  EXPECT_THROW(ParseClassRegistry(
                   "[{\"id\": 1, \"isthing\": 0}, {\"id\": 1, \"isthing\": 1}]"),
               FormatError);
  EXPECT_THROW(ParseClassRegistry("[{\"id\": 1}]"), FormatError);
  EXPECT_THROW(ParseClassRegistry("{\"cats\": []}"), FormatError);
  EXPECT_THROW(ParseClassRegistry("3"), FormatError);
}

TEST(RleTest, RoundTripAndLayout) {
  BinaryMask m(4, 2);
  m.set(1, 0);
  m.set(2, 0);
  m.set(3, 1);
  EXPECT_EQ(EncodeRle(m), (std::vector<int64_t>{1, 2, 4, 1}));
  EXPECT_EQ(DecodeRle(EncodeRle(m), 4, 2), m);
  BinaryMask starts_set(2, 1);
  starts_set.set(0);
  EXPECT_EQ(EncodeRle(starts_set), (std::vector<int64_t>{0, 1, 1}));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    BinaryMask r(1 + i % 9, 1 + i % 5);
    for (size_t p = 0; p < r.size(); ++p) r.set(p, rng() & 1);
    EXPECT_EQ(DecodeRle(EncodeRle(r), r.width(), r.height()), r);
  }
}

TEST(RleTest, RejectsBadSums) {
  const std::vector<int64_t> short_runs = {3, 2};
  const std::vector<int64_t> long_runs = {3, 2, 4};
  const std::vector<int64_t> negative = {9, -1, 1};
  EXPECT_THROW(DecodeRle(short_runs, 4, 2), FormatError);
  EXPECT_THROW(DecodeRle(long_runs, 4, 2), FormatError);
  EXPECT_THROW(DecodeRle(negative, 4, 2), FormatError);
}

TEST(InstancesIoTest, ParseAndRoundTrip) {
  const ClassRegistry r = SmallRegistry();
  const auto inst = ParseInstances(
      R"({"instances": [{"category_id": 3, "score": 0.75, "counts": [1, 2, 5]}]})",
      4, 2, r);
  ASSERT_EQ(inst.size(), 1u);
  EXPECT_EQ(inst[0].mask.area(), 2);
  EXPECT_DOUBLE_EQ(inst[0].score, 0.75);
  ScratchDir dir("inst");
  WriteInstances(inst, dir / "i.json");
  const auto back = ReadInstances(dir / "i.json", 4, 2, r);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].mask, inst[0].mask);
  EXPECT_EQ(back[0].score, inst[0].score);
  EXPECT_EQ(ParseInstances("[]", 4, 2, r).size(), 0u);
}

TEST(InstancesIoTest, RejectsBadRecords) {
  const ClassRegistry r = SmallRegistry();
  const char* bad[] = {
      R"([{"category_id": 1, "score": 0.5, "counts": [8]}])",
      R"([{"category_id": 3, "score": 1.5, "counts": [0, 8]}])",
      R"([{"category_id": 3, "counts": [0, 8]}])",
      R"([{"category_id": 3, "score": 0.5, "counts": [0, 7]}])",
      R"([{"category_id": 3, "score": 0.5, "counts": [8]}])",
      R"([{"category_id": 3, "score": 0.5, "counts": [0, 8.5]}])",
      R"({"masks": []})",
  };
  for (const char* text : bad) {
    EXPECT_THROW(ParseInstances(text, 4, 2, r), FormatError) << text;
  }
}

TEST(SemanticIoTest, RoundTripAndUnknownValues) {
  ScratchDir dir("sem");
  const PanopticMap m = Draw({"ab.", "cca"},
                             {{'a', {1, 0}}, {'b', {2, 0}}, {'c', {5, 0}}});
  WriteSemantic(m, dir / "s.png");
  EXPECT_EQ(ReadSemantic(dir / "s.png", SmallRegistry()), m);
  ClassRegistry small;
  small.Add(1, "a", SegmentKind::kStuff);
  EXPECT_THROW(ReadSemantic(dir / "s.png", small), FormatError);
  const PanopticMap big(1, 1, {{70000, 0}});
  EXPECT_THROW(WriteSemantic(big, dir / "t.png"), ValidationError);
}

TEST(ReportTest, FormatsAndExtensions) {
  EXPECT_EQ(ReportFormatFor("a/b.csv"), ReportFormat::kCsv);
  EXPECT_EQ(ReportFormatFor("a/b.json"), ReportFormat::kJson);
  EXPECT_EQ(ReportFormatFor("a/b"), ReportFormat::kJson);
  PQStat s;
  s[1] = {0.9, 1, 0, 0};
  s[3] = {1.6, 2, 1, 1};
  const PQResult r = ComputePq(s, SmallRegistry());
  const std::string csv = FormatReport(r, ReportFormat::kCsv);
  EXPECT_EQ(csv,
            "scope,class_id,name,kind,pq,sq,rq,iou_sum,tp,fp,fn,num_classes\n"
            "class,1,stuff_1,stuff,0.9000,0.9000,1.0000,0.9000,1,0,0,\n"
            "class,3,thing_1,thing,0.5333,0.8000,0.6667,1.6000,2,1,1,\n"
            "all,,,,0.7167,0.8500,0.8333,,3,1,1,2\n"
            "stuff,,,,0.9000,0.9000,1.0000,,1,0,0,1\n"
            "things,,,,0.5333,0.8000,0.6667,,2,1,1,1\n");
  const std::string json = FormatReport(r, ReportFormat::kJson);
  EXPECT_NE(json.find("\"things\": {\"pq\": 0.5333"), std::string::npos)
      << json;
  const std::string empty = FormatReport(ComputePq({}, SmallRegistry()),
                                         ReportFormat::kJson);
  EXPECT_NE(empty.find("\"all\": null"), std::string::npos) << empty;
}

TEST(RunConfigTest, ParsesKnownKeysOnly) {
  const RunConfig c = ParseRunConfig(
      R"({"gt_dir": "g", "threads": 4, "iou_threshold": 0.6, "seed": 9,
          "format": "csv"})");
  EXPECT_EQ(*c.gt_dir, "g");
  EXPECT_EQ(*c.threads, 4u);
  EXPECT_DOUBLE_EQ(*c.iou_threshold, 0.6);
  EXPECT_EQ(*c.seed, 9u);
  EXPECT_FALSE(c.pred_dir.has_value());
  EXPECT_THROW(ParseRunConfig(R"({"gt": "g"})"), FormatError);
  EXPECT_THROW(ParseRunConfig(R"({"threads": "four"})"), FormatError);
  EXPECT_THROW(ParseRunConfig(R"({"seed": 1.5})"), FormatError);
  EXPECT_THROW(ParseRunConfig("[]"), FormatError);
}

TEST(TextFileTest, IoErrors) {
  EXPECT_THROW(ReadTextFile("/nonexistent/dir/file"), IoError);
  EXPECT_THROW(WriteTextFile("/nonexistent/dir/file", "x"), IoError);
}

}  // namespace
}  // namespace panoptic
