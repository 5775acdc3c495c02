// Copyright 2026 The Segfuse Authors.
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

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "segfuse/bundle.hpp"
#include "segfuse/class_table.hpp"
#include "segfuse/error.hpp"
#include "segfuse/label_map.hpp"
#include "segfuse/synth.hpp"
#include "test_util.hpp"

namespace segfuse {
namespace {

using ::segfuse::testing::RandomMap;

HeadBundle SmallestBundle() {
  HeadBundle b;
  b.image_id = "tiny";
  b.height = 1;
  b.width = 1;
  PromptRecord p;
  p.prompt_text = "building";
  p.presence = 0.5f;
  p.semantic_map = ProbMap::FromValues(1, 1, {0.25f});
  b.categories.push_back(CategoryRecord{"building", {p}});
  return b;
}

HeadBundle RoundTrip(const HeadBundle& b) {
  std::stringstream s(std::ios::in | std::ios::out | std::ios::binary);
  WriteBundle(b, s);
  return ReadBundle(s);
}

// Overwrites 4 bytes at `offset` with a float.
void PokeF32(std::vector<std::uint8_t>& bytes, std::size_t offset, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) bytes[offset + i] = (bits >> (8 * i)) & 0xFF;
}

// Offset of the first prompt's presence in an encoded SmallestBundle.
constexpr std::size_t kPresenceOffset =
    4 + 2 + 2 + (4 + 4) + 4 + 4 + 2 + (4 + 8) + 2 + (4 + 8);

TEST(BundleTest, SmallestBundleRoundTrips) {
  const HeadBundle b = SmallestBundle();
  const auto bytes = EncodeBundle(b);
  EXPECT_EQ(bytes.size(), kPresenceOffset + 4 + 1 + 4 + 4);
  EXPECT_TRUE(BitEqual(ReadBundle(bytes), b));
}

TEST(BundleTest, HeaderBytesAreExact) {
  const auto bytes = EncodeBundle(SmallestBundle());
  const std::uint8_t expected[] = {'S', 'O', 'V', '3', 1, 0, 0, 0,
                                   4,   0,   0,   0,   't', 'i', 'n', 'y',
                                   1,   0,   0,   0,   1, 0, 0, 0, 1, 0};
  ASSERT_GE(bytes.size(), sizeof(expected));
  EXPECT_EQ(0, std::memcmp(bytes.data(), expected, sizeof(expected)));
}

TEST(BundleTest, WriteRejectsOutOfRangeInstance) {
  HeadBundle b = SmallestBundle();
  b.categories[0].prompts[0].instances.push_back(
      InstanceRecord::Cropped(0.9f, BBox{0, 0, 1, 1}, {1.5f}));
  std::stringstream s;
  try {
    WriteBundle(b, s);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("value out of [0,1]"),
              std::string::npos);
    EXPECT_NE(std::string(e.what()).find("instances[0].values[0]"),
              std::string::npos);
  }
}

TEST(BundleTest, RandomSeed7RoundTripIsBitExact) {
  SynthSpec spec;
  spec.seed = 7;
  spec.height = 16;
  spec.width = 16;
  spec.category_count = 3;
  spec.prompts_per_category = 2;
  const HeadBundle b = Generate(spec).bundle;
  const HeadBundle back = RoundTrip(b);
  EXPECT_TRUE(BitEqual(back, b));
  EXPECT_EQ(EncodeBundle(back), EncodeBundle(b));
}

TEST(BundleTest, RandomCasesRoundTrip) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const HeadBundle b = MakeRandomCase(seed).bundle;
    EXPECT_TRUE(BitEqual(RoundTrip(b), b)) << "seed " << seed;
  }
}

TEST(BundleTest, BadMagicIsFormatError) {
  auto bytes = EncodeBundle(SmallestBundle());
  std::memcpy(bytes.data(), "XXXX", 4);
  EXPECT_THROW(ReadBundle(bytes), FormatError);
}

TEST(BundleTest, BadVersionAndFlagsAreFormatErrors) {
  auto bytes = EncodeBundle(SmallestBundle());
  bytes[4] = 2;
  EXPECT_THROW(ReadBundle(bytes), FormatError);
  bytes = EncodeBundle(SmallestBundle());
  bytes[6] = 1;
  EXPECT_THROW(ReadBundle(bytes), FormatError);
}

TEST(BundleTest, TruncationMidMapReportsByteCounts) {
  SynthSpec spec;
  spec.height = 8;
  spec.width = 8;
  spec.category_count = 1;
  const auto bytes = EncodeBundle(Generate(spec).bundle);
  // Cut inside the first semantic map: header, id, dims, category and
  // prompt headers, presence and flag precede it.
  const HeadBundle b = Generate(spec).bundle;
  const std::size_t map_start = 4 + 2 + 2 + 4 + b.image_id.size() + 4 + 4 +
                                2 + 4 + b.categories[0].name.size() + 2 + 4 +
                                b.categories[0].prompts[0].prompt_text.size() +
                                4 + 1;
  const std::size_t cut = map_start + 100;
  std::span<const std::uint8_t> truncated(bytes.data(), cut);
  try {
    ReadBundle(truncated);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("expected 256 bytes"), std::string::npos) << msg;
    EXPECT_NE(msg.find("received 100"), std::string::npos) << msg;
  }
}

TEST(BundleTest, EveryTruncationFails) {
  const auto bytes = EncodeBundle(MakeRandomCase(3).bundle);
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(ReadBundle(std::span<const std::uint8_t>(bytes.data(), n)),
                 IoError)
        << "length " << n;
  }
}

TEST(BundleTest, TrailingGarbageIsRejected) {
  auto bytes = EncodeBundle(SmallestBundle());
  bytes.push_back(0);
  EXPECT_THROW(ReadBundle(bytes), FormatError);
}

TEST(BundleTest, NearRangeValuesAreClampedAndReported) {
  auto bytes = EncodeBundle(SmallestBundle());
  PokeF32(bytes, kPresenceOffset, 1.0f + 5e-7f);
  PokeF32(bytes, kPresenceOffset + 5, -5e-7f);
  ReadReport report;
  const HeadBundle b = ReadBundle(bytes, &report);
  EXPECT_EQ(b.categories[0].prompts[0].presence, 1.0f);
  EXPECT_EQ(b.categories[0].prompts[0].semantic_map->at(0, 0), 0.0f);
  EXPECT_EQ(report.clamped_values, 2u);
  EXPECT_EQ(report.first_clamped_field, "categories[0].prompts[0].presence");
}

TEST(BundleTest, OutOfRangeAndNanValuesAreRejected) {
  for (float bad : {1.0f + 1e-5f, -1e-5f,
                    std::numeric_limits<float>::quiet_NaN(),
                    std::numeric_limits<float>::infinity()}) {
    auto bytes = EncodeBundle(SmallestBundle());
    PokeF32(bytes, kPresenceOffset, bad);
    EXPECT_THROW(ReadBundle(bytes), ValidationError) << bad;
    bytes = EncodeBundle(SmallestBundle());
    PokeF32(bytes, kPresenceOffset + 5, bad);
    EXPECT_THROW(ReadBundle(bytes), ValidationError) << bad;
  }
}

TEST(BundleTest, ValidateNamesOffendingField) {
  HeadBundle b = SmallestBundle();
  b.categories.push_back(b.categories[0]);
  EXPECT_THROW(Validate(b), ValidationError);

  b = SmallestBundle();
  b.categories[0].prompts.push_back(b.categories[0].prompts[0]);
  EXPECT_THROW(Validate(b), ValidationError);

  b = SmallestBundle();
  b.categories[0].prompts.clear();
  EXPECT_THROW(Validate(b), ValidationError);

  b = SmallestBundle();
  b.categories[0].prompts[0].instances.push_back(
      InstanceRecord::Cropped(0.5f, BBox{0, 0, 2, 1}, {0.1f, 0.2f}));
  try {
    Validate(b);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(
                  "categories[0].prompts[0].instances[0].bbox"),
              std::string::npos);
  }

  b = SmallestBundle();
  b.categories[0].name = "\xC3\x28";
  EXPECT_THROW(Validate(b), ValidationError);

  b = SmallestBundle();
  b.categories[0].prompts[0].semantic_map = ProbMap(2, 1);
  EXPECT_THROW(Validate(b), ValidationError);

  b = SmallestBundle();
  b.height = 0;
  EXPECT_THROW(Validate(b), ValidationError);
}

TEST(BundleTest, CorruptBBoxOnReadIsValidationError) {
  HeadBundle b = SmallestBundle();
  b.width = 4;
  b.categories[0].prompts[0].semantic_map = ProbMap(1, 4);
  b.categories[0].prompts[0].instances.push_back(
      InstanceRecord::Cropped(0.5f, BBox{1, 0, 3, 1}, {0.1f, 0.2f}));
  auto bytes = EncodeBundle(b);
  // The bbox x1 field sits 8 bytes before the two instance values.
  const std::size_t x1_offset = bytes.size() - 8 - 8;
  bytes[x1_offset] = 9;
  EXPECT_THROW(ReadBundle(bytes), ValidationError);
}

TEST(BundleTest, CroppedAndDenseExpandIdentically) {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t h = rng.Range(1, 12);
    const std::uint32_t w = rng.Range(1, 12);
    ProbMap dense(h, w);
    // Sparse support inside a random window.
    const std::uint32_t x0 = rng.Below(w), y0 = rng.Below(h);
    const std::uint32_t x1 = rng.Range(x0 + 1, w), y1 = rng.Range(y0 + 1, h);
    for (std::uint32_t y = y0; y < y1; ++y) {
      for (std::uint32_t x = x0; x < x1; ++x) {
        if (rng.Chance(0.6f)) dense.at(y, x) = rng.NextUnit();
      }
    }
    const InstanceRecord full = InstanceRecord::Dense(rng.NextUnit(), dense);
    const InstanceRecord cropped = CropToSupport(full, h, w);
    EXPECT_EQ(cropped.encoding, InstanceEncoding::kBBoxCropped);
    EXPECT_LE(cropped.bbox.area(), full.bbox.area());
    EXPECT_TRUE(ExpandDense(cropped, h, w).BitEqual(dense));
    EXPECT_TRUE(ExpandDense(full, h, w).BitEqual(dense));
  }
}

TEST(BundleTest, CropBundleCutsMapsAndInstances) {
  SplitMix64 rng(4);
  HeadBundle b;
  b.image_id = "crop";
  b.height = 6;
  b.width = 8;
  PromptRecord p;
  p.prompt_text = "a";
  p.presence = 0.7f;
  p.semantic_map = RandomMap(rng, 6, 8);
  p.instances.push_back(InstanceRecord::Dense(0.9f, RandomMap(rng, 6, 8)));
  std::vector<float> v(3 * 2);
  for (float& x : v) x = rng.NextUnit();
  p.instances.push_back(InstanceRecord::Cropped(0.8f, BBox{4, 1, 7, 3}, v));
  b.categories.push_back(CategoryRecord{"a", {p}});

  const BBox window{2, 2, 6, 5};
  const HeadBundle c = CropBundle(b, window);
  ASSERT_NO_THROW(Validate(c));
  EXPECT_EQ(c.height, 3u);
  EXPECT_EQ(c.width, 4u);
  const auto& cp = c.categories[0].prompts[0];
  EXPECT_EQ(cp.presence, 0.7f);
  for (std::uint32_t y = 0; y < 3; ++y) {
    for (std::uint32_t x = 0; x < 4; ++x) {
      EXPECT_EQ(cp.semantic_map->at(y, x),
                p.semantic_map->at(window.y0 + y, window.x0 + x));
      for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(ExpandDense(cp.instances[k], 3, 4).at(y, x),
                  ExpandDense(p.instances[k], 6, 8)
                      .at(window.y0 + y, window.x0 + x));
      }
    }
  }
}

TEST(LabelMapTest, SmallRasterRoundTrips) {
  const LabelMap m = LabelMap::FromLabels(2, 2, {0, 1, 1, 0});
  const auto bytes = EncodeLabelMap(m);
  EXPECT_EQ(bytes.size(), kLabelMapHeaderSize + 8);
  EXPECT_EQ(ReadLabelMap(bytes), m);
}

TEST(LabelMapTest, IgnoreValueIsPreserved) {
  const LabelMap m = LabelMap::FromLabels(1, 3, {kIgnoreIndex, 2, 65535});
  const LabelMap back = ReadLabelMap(EncodeLabelMap(m));
  EXPECT_EQ(back.at(0, 0), kIgnoreIndex);
  EXPECT_EQ(back.at(0, 2), 65535);
}

TEST(LabelMapTest, ShortBodyIsIoError) {
  auto bytes = EncodeLabelMap(LabelMap(4, 4));
  bytes.resize(kLabelMapHeaderSize + 15 * 2);
  EXPECT_THROW(ReadLabelMap(bytes), IoError);
}

TEST(LabelMapTest, LongBodyAndBadMagicAreFormatErrors) {
  auto bytes = EncodeLabelMap(LabelMap(2, 2));
  bytes.push_back(0);
  bytes.push_back(0);
  EXPECT_THROW(ReadLabelMap(bytes), FormatError);
  bytes = EncodeLabelMap(LabelMap(2, 2));
  bytes[0] = 'X';
  EXPECT_THROW(ReadLabelMap(bytes), FormatError);
}

TEST(LabelMapTest, ValidateLabelsChecksClassCount) {
  const ClassTable classes({"a", "b"});
  EXPECT_NO_THROW(ValidateLabels(LabelMap::FromLabels(1, 3, {0, 1, kIgnoreIndex}),
                                 classes));
  EXPECT_THROW(ValidateLabels(LabelMap::FromLabels(1, 1, {2}), classes),
               ValidationError);
}

TEST(ClassTableTest, ParsesAndSerializes) {
  const ClassTable t = ParseClassTable(
      R"({"classes": ["building", "road", "background"], "background_index": 2})");
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.background_index(), std::optional<std::uint16_t>(2));
  EXPECT_EQ(t.ScoredIndices(), (std::vector<std::uint16_t>{0, 1}));
  EXPECT_EQ(ParseClassTable(ClassTableToJson(t)), t);

  const ClassTable n =
      ParseClassTable(R"({"classes": ["a"], "background_index": null})");
  EXPECT_FALSE(n.background_index().has_value());
  EXPECT_EQ(ParseClassTable(R"({"classes": ["a"]})"), n);
}

TEST(ClassTableTest, RejectsInvalidTables) {
  EXPECT_THROW(ParseClassTable(R"({"classes": ["a", "a"]})"), ValidationError);
  EXPECT_THROW(ParseClassTable(R"({"classes": ["a"], "background_index": 1})"),
               ValidationError);
  EXPECT_THROW(ParseClassTable(R"({"classes": []})"), ValidationError);
  EXPECT_THROW(ParseClassTable(R"({"names": ["a"]})"), FormatError);
  EXPECT_THROW(ParseClassTable("not json"), FormatError);
}

}  // namespace
}  // namespace segfuse
