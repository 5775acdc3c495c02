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

#include <algorithm>
#include <vector>

#include "gtest/gtest.h"
#include "segfuse/error.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/oracle.hpp"
#include "segfuse/synth.hpp"
#include "test_util.hpp"

namespace segfuse {
namespace {

using ::segfuse::testing::TempDir;

double Miou(const LabelMap& pred, const LabelMap& truth,
            const ClassTable& classes) {
  ConfusionMatrix cm(classes.size());
  cm.Accumulate(pred, truth);
  return MeanIou(cm);
}

TEST(SplitMix64Test, MatchesPublishedSequence) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.Next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.Next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.Next(), 0x06c45d188009454fULL);
}

TEST(SplitMix64Test, DerivedDrawsStayInRange) {
  SplitMix64 rng(99);
  for (int i = 0; i < 10000; ++i) {
    const float u = rng.NextUnit();
    EXPECT_GE(u, 0.0f);
    EXPECT_LT(u, 1.0f);
    EXPECT_LT(rng.Below(7), 7u);
    const auto r = rng.Range(3, 5);
    EXPECT_GE(r, 3u);
    EXPECT_LE(r, 5u);
  }
}

TEST(GenerateTest, SameSpecIsBitIdentical) {
  SynthSpec spec;
  spec.seed = 42;
  spec.prompts_per_category = 2;
  spec.distractor_count = 1;
  const SynthScene a = Generate(spec);
  const SynthScene b = Generate(spec);
  EXPECT_TRUE(BitEqual(a.bundle, b.bundle));
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.classes, b.classes);
  spec.seed = 43;
  EXPECT_FALSE(BitEqual(Generate(spec).bundle, a.bundle));
}

TEST(GenerateTest, NoInstancesWhenMaxInstancesIsZero) {
  SynthSpec spec;
  spec.max_instances = 0;
  spec.stuff_fraction = 1.0f;
  const SynthScene s = Generate(spec);
  for (const auto& cat : s.bundle.categories) {
    for (const auto& p : cat.prompts) EXPECT_TRUE(p.instances.empty());
  }
  EXPECT_NO_THROW(Validate(s.bundle));
}

// Recomputes the construction rules from the ground truth and checks every
// generated value against them.
TEST(GenerateTest, Seed21StatisticsMatchConstruction) {
  SynthSpec spec;
  spec.seed = 21;
  spec.height = 32;
  spec.width = 32;
  spec.category_count = 4;
  const SynthScene s = Generate(spec);
  ASSERT_EQ(s.classes.size(), 5u);
  ASSERT_EQ(s.classes.background_index(), 4);
  const float slack = spec.noise_level / 2 + 1e-6f;
  for (std::uint16_t c = 0; c < 4; ++c) {
    const auto& prompt = s.bundle.categories[c].prompts.front();
    EXPECT_GE(prompt.presence, 0.85f);
    const ProbMap& sem = *prompt.semantic_map;
    const bool stuff = c < 2;
    double inside_sum = 0, outside_sum = 0;
    std::size_t inside_n = 0, outside_n = 0;
    for (std::uint32_t y = 0; y < 32; ++y) {
      for (std::uint32_t x = 0; x < 32; ++x) {
        const float v = sem.at(y, x);
        if (s.truth.at(y, x) == c) {
          inside_sum += v;
          ++inside_n;
          if (stuff) {
            EXPECT_GE(v, 0.7f - slack);
          } else {
            EXPECT_GE(v, 0.25f - slack);
            EXPECT_LE(v, 0.45f + slack);
          }
        } else {
          outside_sum += v;
          ++outside_n;
        }
      }
    }
    ASSERT_GT(inside_n, 0u) << "category " << c;
    EXPECT_GT(inside_sum / inside_n, outside_sum / outside_n + 0.1);
    for (const auto& inst : prompt.instances) {
      EXPECT_EQ(inst.encoding, InstanceEncoding::kBBoxCropped);
      if (stuff) {
        EXPECT_GE(inst.confidence, 0.5f);
        EXPECT_LT(inst.bbox.area(), 32u * 32u);
      } else {
        EXPECT_GE(inst.confidence, 0.75f);
        for (float v : inst.values) EXPECT_GE(v, 0.85f);
      }
    }
  }
}

TEST(GenerateTest, DistractorsHaveLowPresence) {
  SynthSpec spec;
  spec.seed = 5;
  spec.category_count = 5;
  spec.distractor_count = 2;
  const SynthScene s = Generate(spec);
  for (std::size_t c = 3; c < 5; ++c) {
    EXPECT_LE(s.bundle.categories[c].prompts.front().presence, 0.1f);
  }
  for (std::uint16_t v : s.truth.labels()) {
    EXPECT_TRUE(v < 3 || v == 5);
  }
}

TEST(GenerateTest, GeneratedScenesFuseToTheirTruth) {
  SynthSpec spec;
  spec.seed = 3;
  spec.distractor_count = 1;
  const SynthScene s = Generate(spec);
  const LabelMap pred = RunPipeline(s.bundle, s.classes, FusionConfig{});
  EXPECT_GT(Miou(pred, s.truth, s.classes), 0.8);
}

TEST(GenerateTest, InvalidSpecsAreRejected) {
  SynthSpec spec;
  spec.height = 0;
  EXPECT_THROW(Generate(spec), ValidationError);
  spec = {};
  spec.stuff_fraction = 1.5f;
  EXPECT_THROW(Generate(spec), ValidationError);
  EXPECT_THROW(ParseSynthSpec(SynthSpecToJson(spec)), ValidationError);
  EXPECT_THROW(ParseSynthSpec(R"({"seed": "x"})"), ValidationError);
  EXPECT_THROW(ParseSynthSpec("[1]"), FormatError);
  spec = {};
  spec.seed = 1234567890123ULL;
  spec.noise_level = 0.25f;
  const SynthSpec parsed = ParseSynthSpec(SynthSpecToJson(spec));
  EXPECT_EQ(parsed.seed, spec.seed);
  EXPECT_EQ(parsed.noise_level, 0.25f);
}

TEST(ReferencePipelineTest, AllZeroBundleIsAllBackground) {
  HeadBundle b;
  b.image_id = "zero";
  b.height = 3;
  b.width = 5;
  for (const char* n : {"a", "b"}) {
    PromptRecord p;
    p.prompt_text = n;
    p.presence = 1.0f;
    p.semantic_map = ProbMap(3, 5);
    b.categories.push_back({n, {p}});
  }
  const ClassTable classes({"a", "b", "background"}, 2);
  const LabelMap out = ReferencePipeline(b, classes, FusionConfig{});
  EXPECT_TRUE(std::all_of(out.labels().begin(), out.labels().end(),
                          [](std::uint16_t v) { return v == 2; }));
}

TEST(RandomCaseTest, RespectsLimitsAndValidates) {
  const RandomCaseLimits limits{20, 30, 4, 2, 3};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const RandomCase rc = MakeRandomCase(seed, limits);
    EXPECT_LE(rc.bundle.height, 20u);
    EXPECT_LE(rc.bundle.width, 30u);
    EXPECT_LE(rc.classes.ScoredIndices().size(), 4u);
    for (const auto& cat : rc.bundle.categories) {
      EXPECT_LE(cat.prompts.size(), 2u);
      for (const auto& p : cat.prompts) EXPECT_LE(p.instances.size(), 3u);
    }
    EXPECT_NO_THROW(Validate(rc.bundle));
    EXPECT_NO_THROW(rc.config.Validate());
  }
}

TEST(AblationTest, Seed1FusedBeatsBothSingleHeads) {
  const AblationScene s = MakeAblationScene(1);
  const double fused =
      Miou(RunPipeline(s.full, s.classes, s.config), s.truth, s.classes);
  const double inst = Miou(RunPipeline(s.instance_only, s.classes, s.config),
                           s.truth, s.classes);
  const double sem = Miou(RunPipeline(s.semantic_only, s.classes, s.config),
                          s.truth, s.classes);
  EXPECT_GT(fused, inst);
  EXPECT_GT(fused, sem);
}

TEST(AblationTest, InstanceOnlyLosesStuff) {
  const AblationScene s = MakeAblationScene(1);
  ConfusionMatrix cm(s.classes.size());
  cm.Accumulate(RunPipeline(s.instance_only, s.classes, s.config), s.truth);
  const auto iou = IouPerClass(cm);
  for (std::uint16_t stuff : {0, 1}) {
    EXPECT_TRUE(!iou[stuff] || *iou[stuff] < 0.5) << s.classes.name(stuff);
  }
}

TEST(AblationTest, ThingsOnlySceneTiesInstanceOnly) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const AblationScene s = MakeAblationScene(seed, false);
    EXPECT_EQ(Miou(RunPipeline(s.full, s.classes, s.config), s.truth,
                   s.classes),
              Miou(RunPipeline(s.instance_only, s.classes, s.config), s.truth,
                   s.classes));
  }
}

TEST(FixturesTest, WritesReloadableFixturesWithDigests) {
  TempDir dir;
  SynthSpec spec;
  spec.height = 24;
  spec.width = 24;
  const std::vector<std::uint64_t> seeds = {0, 1, 2};
  const auto entries = WriteFixtures(dir.path(), spec, seeds, FusionConfig{});
  ASSERT_EQ(entries.size(), 3u);
  for (const auto& e : entries) {
    const HeadBundle b = ReadBundleFile(dir.path() / e.bundle);
    const ClassTable c = ReadClassTableFile(dir.path() / e.classes);
    EXPECT_EQ(LabelMapDigest(RunPipeline(b, c, FusionConfig{})), e.digest);
    EXPECT_EQ(e.digest.size(), 16u);
  }
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "manifest.json"));
}

TEST(LabelMapDigestTest, IsFnv1aOverEncodedRaster) {
  const LabelMap m(1, 1, 0);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t byte : EncodeLabelMap(m)) {
    h = (h ^ byte) * 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  EXPECT_EQ(LabelMapDigest(m), buf);
  EXPECT_NE(LabelMapDigest(LabelMap(1, 1, 1)), LabelMapDigest(m));
}

}  // namespace
}  // namespace segfuse
