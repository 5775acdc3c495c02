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

#ifndef SEGFUSE_SYNTH_HPP_
#define SEGFUSE_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segfuse/bundle.hpp"
#include "segfuse/class_table.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/label_map.hpp"

namespace segfuse {

// SplitMix64 (Steele, Lea, Flood 2014). The state advances by the golden
// gamma 0x9E3779B97F4A7C15 and each output is the state passed through the
// finalizer
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z =  z ^ (z >> 31)
// so output i of seed s is mix(s + (i + 1) * gamma). Every derived draw
// below uses only integer ops and single IEEE float operations, which makes
// fixtures reproducible in any language.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next();
  // Top 24 bits scaled by 2^-24: uniform on [0, 1) and exact in f32.
  float NextUnit();
  // lo + (hi - lo) * NextUnit(), evaluated in f32.
  float Between(float lo, float hi);
  // Uniform integer in [0, n) by ((Next() >> 32) * n) >> 32. n >= 1.
  std::uint32_t Below(std::uint32_t n);
  // Uniform integer in [lo, hi].
  std::uint32_t Range(std::uint32_t lo, std::uint32_t hi);
  bool Chance(float p) { return NextUnit() < p; }

 private:
  std::uint64_t state_;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::uint32_t height = 64;
  std::uint32_t width = 64;
  std::uint32_t category_count = 4;
  std::uint32_t prompts_per_category = 1;
  std::uint32_t max_instances = 4;
  // Share of categories generated as amorphous regions; the rest are
  // countable objects. The first round(stuff_fraction * C) are stuff.
  float stuff_fraction = 0.5f;
  // Amplitude of the uniform jitter added to every map.
  float noise_level = 0.05f;
  // Trailing categories absent from the scene; they get near-zero presence
  // and high-scoring false positives.
  std::uint32_t distractor_count = 0;
  // Append a "background" class to the table.
  bool with_background = true;

  void Validate() const;
};

SynthSpec ParseSynthSpec(std::string_view json_text, SynthSpec base = {});
std::string SynthSpecToJson(const SynthSpec& spec);

struct SynthScene {
  HeadBundle bundle;
  LabelMap truth;
  ClassTable classes;
};

// Category c is named "class_NN". Stuff categories own large axis-aligned
// regions with strong semantic maps and instance fragments covering only
// part of each region. Thing categories own small rectangles with sharp
// instance masks and weak, spatially dilated semantic responses.
SynthScene Generate(const SynthSpec& spec);

// Uniform random inputs for equivalence testing, unrelated to any scene.
struct RandomCaseLimits {
  std::uint32_t max_height = 32;
  std::uint32_t max_width = 32;
  std::uint32_t max_categories = 6;
  std::uint32_t max_prompts = 3;
  std::uint32_t max_instances = 5;
};

struct RandomCase {
  HeadBundle bundle;
  ClassTable classes;
  FusionConfig config;
};

RandomCase MakeRandomCase(std::uint64_t seed,
                          const RandomCaseLimits& limits = {});

// One scene, three bundles that differ only in which heads they keep.
struct AblationScene {
  HeadBundle full;
  HeadBundle instance_only;
  HeadBundle semantic_only;
  LabelMap truth;
  ClassTable classes;
  FusionConfig config;
};

// Things are recoverable only from instances and stuff only from the
// semantic head. With include_stuff false the scene has only things.
AblationScene MakeAblationScene(std::uint64_t seed, bool include_stuff = true);

// 16 lowercase hex digits of FNV-1a 64 over the encoded label raster.
std::string LabelMapDigest(const LabelMap& map);

struct FixtureEntry {
  std::uint64_t seed = 0;
  std::string bundle;
  std::string truth;
  std::string classes;
  std::string digest;
};

// Generates one scene per seed under `dir`, labels each with
// ReferencePipeline(config) and writes `manifest.json`:
// {"config": {...}, "spec": {...}, "fixtures": [{"seed": n, "bundle": s,
//  "truth": s, "classes": s, "digest": s}, ...]}
std::vector<FixtureEntry> WriteFixtures(const std::filesystem::path& dir,
                                        const SynthSpec& spec_template,
                                        std::span<const std::uint64_t> seeds,
                                        const FusionConfig& config);

}  // namespace segfuse

#endif  // SEGFUSE_SYNTH_HPP_
