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

#include "segfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "segfuse/error.hpp"
#include "segfuse/oracle.hpp"

namespace segfuse {

std::uint64_t SplitMix64::Next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

float SplitMix64::NextUnit() {
  return static_cast<float>(Next() >> 40) * 0x1.0p-24f;
}

float SplitMix64::Between(float lo, float hi) {
  return lo + (hi - lo) * NextUnit();
}

std::uint32_t SplitMix64::Below(std::uint32_t n) {
  return static_cast<std::uint32_t>(((Next() >> 32) * n) >> 32);
}

std::uint32_t SplitMix64::Range(std::uint32_t lo, std::uint32_t hi) {
  return lo + Below(hi - lo + 1);
}

namespace {

float Clamp01(float v) { return std::min(1.0f, std::max(0.0f, v)); }

std::string ClassName(std::uint32_t c) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "class_%02u", c);
  return buf;
}

// Random rectangle with each side in [min_side, max_side], inside the image.
BBox RandomRect(SplitMix64& rng, std::uint32_t height, std::uint32_t width,
                std::uint32_t min_side, std::uint32_t max_side) {
  const std::uint32_t rw = rng.Range(std::min(min_side, width),
                                     std::min(max_side, width));
  const std::uint32_t rh = rng.Range(std::min(min_side, height),
                                     std::min(max_side, height));
  const std::uint32_t x0 = rng.Below(width - rw + 1);
  const std::uint32_t y0 = rng.Below(height - rh + 1);
  return BBox{x0, y0, x0 + rw, y0 + rh};
}

void Paint(LabelMap& truth, const BBox& r, std::uint16_t label) {
  for (std::uint32_t y = r.y0; y < r.y1; ++y) {
    for (std::uint32_t x = r.x0; x < r.x1; ++x) truth.at(y, x) = label;
  }
}

std::vector<float> FillRect(SplitMix64& rng, const BBox& r, float lo,
                            float hi) {
  std::vector<float> values(r.area());
  for (float& v : values) v = rng.Between(lo, hi);
  return values;
}

}  // namespace

void SynthSpec::Validate() const {
  if (height == 0 || width == 0) {
    throw ValidationError("synth spec: height and width must be >= 1");
  }
  if (category_count == 0) {
    throw ValidationError("synth spec: category_count must be >= 1");
  }
  if (prompts_per_category == 0) {
    throw ValidationError("synth spec: prompts_per_category must be >= 1");
  }
  if (!(stuff_fraction >= 0.0f && stuff_fraction <= 1.0f)) {
    throw ValidationError("synth spec: stuff_fraction must be in [0,1]");
  }
  if (!(noise_level >= 0.0f && noise_level <= 1.0f)) {
    throw ValidationError("synth spec: noise_level must be in [0,1]");
  }
  if (distractor_count >= category_count) {
    throw ValidationError(
        "synth spec: distractor_count must be < category_count");
  }
  if (category_count + (with_background ? 1 : 0) >= kIgnoreIndex) {
    throw ValidationError("synth spec: too many categories");
  }
}

SynthSpec ParseSynthSpec(std::string_view json_text, SynthSpec base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("synth spec: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("synth spec: expected an object");
  try {
    base.seed = j.value("seed", base.seed);
    base.height = j.value("height", base.height);
    base.width = j.value("width", base.width);
    base.category_count = j.value("category_count", base.category_count);
    base.prompts_per_category =
        j.value("prompts_per_category", base.prompts_per_category);
    base.max_instances = j.value("max_instances", base.max_instances);
    base.stuff_fraction = j.value("stuff_fraction", base.stuff_fraction);
    base.noise_level = j.value("noise_level", base.noise_level);
    base.distractor_count = j.value("distractor_count", base.distractor_count);
    base.with_background = j.value("with_background", base.with_background);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  base.Validate();
  return base;
}

std::string SynthSpecToJson(const SynthSpec& spec) {
  nlohmann::json j = {{"seed", spec.seed},
                      {"height", spec.height},
                      {"width", spec.width},
                      {"category_count", spec.category_count},
                      {"prompts_per_category", spec.prompts_per_category},
                      {"max_instances", spec.max_instances},
                      {"stuff_fraction", spec.stuff_fraction},
                      {"noise_level", spec.noise_level},
                      {"distractor_count", spec.distractor_count},
                      {"with_background", spec.with_background}};
  return j.dump(2) + "\n";
}

SynthScene Generate(const SynthSpec& spec) {
  spec.Validate();
  SplitMix64 rng(spec.seed);
  const std::uint32_t H = spec.height;
  const std::uint32_t W = spec.width;
  const std::uint32_t C = spec.category_count;
  const auto stuff_count = static_cast<std::uint32_t>(
      std::lround(static_cast<double>(spec.stuff_fraction) * C));
  const std::uint32_t first_distractor = C - spec.distractor_count;
  auto is_stuff = [&](std::uint32_t c) {
    return c < stuff_count || (!spec.with_background && c == 0);
  };

  std::vector<std::string> names;
  for (std::uint32_t c = 0; c < C; ++c) names.push_back(ClassName(c));
  std::optional<std::uint16_t> background;
  if (spec.with_background) {
    names.push_back("background");
    background = static_cast<std::uint16_t>(C);
  }

  SynthScene scene;
  scene.classes = ClassTable(names, background);
  // Without a background class, category 0 is the ground everything else
  // sits on.
  scene.truth = LabelMap(H, W, spec.with_background
                                   ? static_cast<std::uint16_t>(C)
                                   : std::uint16_t{0});

  // Ground-truth layout: stuff regions first, then things on top.
  std::vector<std::vector<BBox>> regions(C);
  if (!spec.with_background) regions[0].push_back(BBox{0, 0, W, H});
  for (std::uint32_t c = 0; c < first_distractor; ++c) {
    if (!is_stuff(c) || (!spec.with_background && c == 0)) continue;
    const std::uint32_t count = rng.Range(1, 2);
    for (std::uint32_t i = 0; i < count; ++i) {
      const BBox r = RandomRect(rng, H, W, std::max(1u, H * 3 / 10),
                                std::max(1u, H * 6 / 10));
      regions[c].push_back(r);
      Paint(scene.truth, r, static_cast<std::uint16_t>(c));
    }
  }
  const std::uint32_t max_side = std::max(2u, std::min(H, W) / 6);
  for (std::uint32_t c = 0; c < first_distractor; ++c) {
    if (is_stuff(c)) continue;
    const std::uint32_t count = rng.Range(1, std::max(1u, spec.max_instances));
    for (std::uint32_t i = 0; i < count; ++i) {
      const BBox r = RandomRect(rng, H, W, 2, max_side);
      regions[c].push_back(r);
      Paint(scene.truth, r, static_cast<std::uint16_t>(c));
    }
  }

  HeadBundle& b = scene.bundle;
  b.image_id = "synth-" + std::to_string(spec.seed);
  b.height = H;
  b.width = W;
  for (std::uint32_t c = 0; c < C; ++c) {
    const bool distractor = c >= first_distractor;
    const bool stuff = is_stuff(c);
    const auto label = static_cast<std::uint16_t>(c);
    CategoryRecord cat{names[c], {}};
    for (std::uint32_t p = 0; p < spec.prompts_per_category; ++p) {
      const float gain = p == 0 ? 1.0f : rng.Between(0.85f, 1.0f);
      PromptRecord prompt;
      prompt.prompt_text = p == 0 ? names[c] : names[c] + "_syn" +
                                                   std::to_string(p);
      prompt.presence = distractor ? rng.Between(0.0f, 0.1f)
                                   : rng.Between(0.85f, 1.0f);

      // A thing's semantic response is weak and bleeds one pixel past the
      // object outline.
      std::vector<bool> near_thing;
      if (!stuff && !distractor) {
        near_thing.assign(static_cast<std::size_t>(H) * W, false);
        for (const BBox& r : regions[c]) {
          const std::uint32_t y0 = r.y0 > 0 ? r.y0 - 1 : 0;
          const std::uint32_t x0 = r.x0 > 0 ? r.x0 - 1 : 0;
          const std::uint32_t y1 = std::min(H, r.y1 + 1);
          const std::uint32_t x1 = std::min(W, r.x1 + 1);
          for (std::uint32_t y = y0; y < y1; ++y) {
            for (std::uint32_t x = x0; x < x1; ++x) {
              near_thing[static_cast<std::size_t>(y) * W + x] = true;
            }
          }
        }
      }
      BBox false_positive{};
      if (distractor) false_positive = RandomRect(rng, H, W, 1, max_side * 2);

      ProbMap sem(H, W);
      for (std::uint32_t y = 0; y < H; ++y) {
        for (std::uint32_t x = 0; x < W; ++x) {
          float v;
          if (distractor) {
            const bool inside = x >= false_positive.x0 &&
                                x < false_positive.x1 &&
                                y >= false_positive.y0 && y < false_positive.y1;
            v = inside ? rng.Between(0.85f, 0.98f) : rng.Between(0.0f, 0.1f);
          } else if (stuff) {
            v = scene.truth.at(y, x) == label ? rng.Between(0.7f, 0.95f)
                                              : rng.Between(0.0f, 0.1f);
          } else {
            v = near_thing[static_cast<std::size_t>(y) * W + x]
                    ? rng.Between(0.25f, 0.45f)
                    : rng.Between(0.0f, 0.1f);
          }
          const float jitter = spec.noise_level * (rng.NextUnit() - 0.5f);
          sem.at(y, x) = Clamp01(v * gain + jitter);
        }
      }
      prompt.semantic_map = std::move(sem);

      if (spec.max_instances > 0) {
        if (distractor) {
          prompt.instances.push_back(InstanceRecord::Cropped(
              rng.Between(0.7f, 0.9f), false_positive,
              FillRect(rng, false_positive, 0.85f, 1.0f)));
        } else if (stuff) {
          // Fragments: partial sub-rectangles of each region.
          for (const BBox& r : regions[c]) {
            if (prompt.instances.size() >= spec.max_instances) break;
            const std::uint32_t fw = std::max(1u, r.width() * 2 / 5);
            const std::uint32_t fh = std::max(1u, r.height() * 3 / 5);
            const std::uint32_t fx = r.x0 + rng.Below(r.width() - fw + 1);
            const std::uint32_t fy = r.y0 + rng.Below(r.height() - fh + 1);
            const BBox frag{fx, fy, fx + fw, fy + fh};
            auto values = FillRect(rng, frag, 0.6f, 0.9f);
            for (float& v : values) v = Clamp01(v * gain);
            prompt.instances.push_back(InstanceRecord::Cropped(
                rng.Between(0.5f, 0.9f), frag, std::move(values)));
          }
        } else {
          for (const BBox& r : regions[c]) {
            if (prompt.instances.size() >= spec.max_instances) break;
            auto values = FillRect(rng, r, 0.85f, 1.0f);
            for (float& v : values) v = Clamp01(v * gain);
            prompt.instances.push_back(InstanceRecord::Cropped(
                rng.Between(0.75f, 0.99f), r, std::move(values)));
          }
        }
      }
      cat.prompts.push_back(std::move(prompt));
    }
    b.categories.push_back(std::move(cat));
  }
  return scene;
}

namespace {

// Draws a probability in one of several regimes, including exact 0 and 1
// and a coarse grid that makes ties common.
float DrawProbability(SplitMix64& rng, std::uint32_t regime) {
  switch (regime) {
    case 0:
      return rng.NextUnit();
    case 1:
      return static_cast<float>(rng.Below(5)) * 0.25f;
    default: {
      const std::uint32_t pick = rng.Below(4);
      if (pick == 0) return 0.0f;
      if (pick == 1) return 1.0f;
      return rng.NextUnit();
    }
  }
}

}  // namespace

RandomCase MakeRandomCase(std::uint64_t seed, const RandomCaseLimits& limits) {
  SplitMix64 rng(seed);
  RandomCase rc;
  const std::uint32_t H = rng.Range(1, std::max(1u, limits.max_height));
  const std::uint32_t W = rng.Range(1, std::max(1u, limits.max_width));
  const std::uint32_t C = rng.Range(1, std::max(1u, limits.max_categories));

  std::vector<std::string> names;
  for (std::uint32_t c = 0; c < C; ++c) names.push_back("c" + std::to_string(c));
  std::optional<std::uint16_t> background;
  if (rng.Chance(0.5f)) {
    const std::uint32_t at = rng.Below(C + 1);
    names.insert(names.begin() + at, "bg");
    background = static_cast<std::uint16_t>(at);
  }
  rc.classes = ClassTable(names, background);

  HeadBundle& b = rc.bundle;
  b.image_id = "random-" + std::to_string(seed);
  b.height = H;
  b.width = W;
  std::vector<std::string> category_names;
  for (const auto& n : names) {
    if (n != "bg") category_names.push_back(n);
  }
  // Bundle order is independent of class-table order.
  for (std::size_t i = category_names.size(); i > 1; --i) {
    std::swap(category_names[i - 1],
              category_names[rng.Below(static_cast<std::uint32_t>(i))]);
  }
  for (const auto& name : category_names) {
    CategoryRecord cat{name, {}};
    const std::uint32_t prompts = rng.Range(1, std::max(1u, limits.max_prompts));
    for (std::uint32_t p = 0; p < prompts; ++p) {
      PromptRecord prompt;
      prompt.prompt_text = name + "/p" + std::to_string(p);
      prompt.presence = DrawProbability(rng, rng.Below(3));
      if (rng.Chance(0.7f)) {
        const std::uint32_t regime = rng.Below(3);
        ProbMap m(H, W);
        for (float& v : m.values()) v = DrawProbability(rng, regime);
        prompt.semantic_map = std::move(m);
      }
      const std::uint32_t n = rng.Range(0, limits.max_instances);
      for (std::uint32_t k = 0; k < n; ++k) {
        const std::uint32_t regime = rng.Below(3);
        const float conf = DrawProbability(rng, rng.Below(3));
        if (rng.Chance(0.4f)) {
          ProbMap m(H, W);
          for (float& v : m.values()) v = DrawProbability(rng, regime);
          prompt.instances.push_back(InstanceRecord::Dense(conf, m));
        } else {
          const std::uint32_t x0 = rng.Below(W + 1);
          const std::uint32_t y0 = rng.Below(H + 1);
          const std::uint32_t x1 = x0 + rng.Below(W - x0 + 1);
          const std::uint32_t y1 = y0 + rng.Below(H - y0 + 1);
          BBox box{x0, y0, x1, y1};
          std::vector<float> values(box.area());
          for (float& v : values) v = DrawProbability(rng, regime);
          prompt.instances.push_back(
              InstanceRecord::Cropped(conf, box, std::move(values)));
        }
      }
      cat.prompts.push_back(std::move(prompt));
    }
    b.categories.push_back(std::move(cat));
  }
  rc.config.tau = DrawProbability(rng, rng.Below(3));
  rc.config.instance_conf_threshold = DrawProbability(rng, rng.Below(3));
  rc.config.presence_gating = rng.Chance(0.8f);
  return rc;
}

AblationScene MakeAblationScene(std::uint64_t seed, bool include_stuff) {
  SplitMix64 rng(seed ^ 0xAB1A7105ULL);
  constexpr std::uint32_t kSize = 64;
  constexpr std::uint32_t kCell = 8;

  std::vector<std::string> names;
  if (include_stuff) {
    names.push_back("road");
    names.push_back("bareland");
  }
  const auto first_thing = static_cast<std::uint16_t>(names.size());
  names.push_back("building");
  names.push_back("vehicle");
  const auto distractor = static_cast<std::uint16_t>(names.size());
  names.push_back("ship");
  const auto background = static_cast<std::uint16_t>(names.size());
  names.push_back("background");

  AblationScene scene;
  scene.classes = ClassTable(names, background);
  scene.config = FusionConfig{0.5f, 0.5f, true};
  scene.truth = LabelMap(kSize, kSize, background);

  // Stuff: one region in each half of the image.
  std::vector<BBox> stuff_regions;
  if (include_stuff) {
    for (std::uint32_t s = 0; s < 2; ++s) {
      const std::uint32_t w = rng.Range(16, 28);
      const std::uint32_t h = rng.Range(24, 56);
      const std::uint32_t x0 = s * 32 + rng.Below(32 - w + 1);
      const std::uint32_t y0 = rng.Below(kSize - h + 1);
      stuff_regions.push_back(BBox{x0, y0, x0 + w, y0 + h});
      Paint(scene.truth, stuff_regions.back(), static_cast<std::uint16_t>(s));
    }
  }

  // Things: small objects in distinct cells of an 8x8 grid, so no two
  // objects overlap.
  std::vector<std::uint32_t> cells(kCell * kCell);
  for (std::uint32_t i = 0; i < cells.size(); ++i) cells[i] = i;
  for (std::size_t i = cells.size(); i > 1; --i) {
    std::swap(cells[i - 1], cells[rng.Below(static_cast<std::uint32_t>(i))]);
  }
  std::vector<std::vector<BBox>> objects(2);
  std::size_t next_cell = 0;
  for (std::uint32_t t = 0; t < 2; ++t) {
    const std::uint32_t count = t == 0 ? rng.Range(3, 5) : rng.Range(4, 8);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t cell = cells[next_cell++];
      const std::uint32_t w = rng.Range(3, 6);
      const std::uint32_t h = rng.Range(3, 6);
      const std::uint32_t x0 = (cell % kCell) * kCell + rng.Below(kCell - w + 1);
      const std::uint32_t y0 = (cell / kCell) * kCell + rng.Below(kCell - h + 1);
      objects[t].push_back(BBox{x0, y0, x0 + w, y0 + h});
      Paint(scene.truth, objects[t].back(),
            static_cast<std::uint16_t>(first_thing + t));
    }
  }

  auto inside_any = [](const std::vector<BBox>& boxes, std::uint32_t y,
                       std::uint32_t x) {
    for (const BBox& r : boxes) {
      if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) return true;
    }
    return false;
  };

  HeadBundle& full = scene.full;
  full.image_id = "ablation-" + std::to_string(seed);
  full.height = kSize;
  full.width = kSize;
  auto single_prompt = [&](const std::string& name, float presence) {
    CategoryRecord cat{name, {}};
    PromptRecord p;
    p.prompt_text = name;
    p.presence = presence;
    cat.prompts.push_back(std::move(p));
    return cat;
  };

  // Stuff: strong semantic coverage, instance fragments over the left 40%
  // of each region.
  for (std::size_t s = 0; s < stuff_regions.size(); ++s) {
    const BBox& r = stuff_regions[s];
    CategoryRecord cat = single_prompt(names[s], rng.Between(0.95f, 1.0f));
    PromptRecord& p = cat.prompts.front();
    ProbMap sem(kSize, kSize);
    for (std::uint32_t y = 0; y < kSize; ++y) {
      for (std::uint32_t x = 0; x < kSize; ++x) {
        const bool in = x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1;
        sem.at(y, x) = in ? rng.Between(0.6f, 0.75f) : rng.Between(0.0f, 0.1f);
      }
    }
    p.semantic_map = std::move(sem);
    const BBox frag{r.x0, r.y0, r.x0 + r.width() * 2 / 5, r.y1};
    p.instances.push_back(InstanceRecord::Cropped(
        rng.Between(0.8f, 0.9f), frag, FillRect(rng, frag, 0.8f, 0.9f)));
    full.categories.push_back(std::move(cat));
  }

  // Things: sharp instances, weak semantic response inside each object.
  for (std::uint32_t t = 0; t < 2; ++t) {
    CategoryRecord cat =
        single_prompt(names[first_thing + t], rng.Between(0.95f, 1.0f));
    PromptRecord& p = cat.prompts.front();
    ProbMap sem(kSize, kSize);
    for (std::uint32_t y = 0; y < kSize; ++y) {
      for (std::uint32_t x = 0; x < kSize; ++x) {
        sem.at(y, x) = inside_any(objects[t], y, x) ? rng.Between(0.2f, 0.35f)
                                                    : rng.Between(0.0f, 0.05f);
      }
    }
    p.semantic_map = std::move(sem);
    for (const BBox& r : objects[t]) {
      p.instances.push_back(InstanceRecord::Cropped(
          rng.Between(0.92f, 0.99f), r, FillRect(rng, r, 0.92f, 1.0f)));
    }
    // Low-confidence decoder noise, removed by the confidence prefilter.
    const BBox junk = RandomRect(rng, kSize, kSize, 4, 12);
    p.instances.push_back(InstanceRecord::Cropped(
        rng.Between(0.2f, 0.4f), junk, FillRect(rng, junk, 0.9f, 1.0f)));
    full.categories.push_back(std::move(cat));
  }

  // Distractor: confident false positives, near-zero presence.
  {
    CategoryRecord cat = single_prompt(names[distractor],
                                       rng.Between(0.01f, 0.05f));
    PromptRecord& p = cat.prompts.front();
    const BBox fp = RandomRect(rng, kSize, kSize, 8, 20);
    ProbMap sem(kSize, kSize);
    for (std::uint32_t y = 0; y < kSize; ++y) {
      for (std::uint32_t x = 0; x < kSize; ++x) {
        const bool in = x >= fp.x0 && x < fp.x1 && y >= fp.y0 && y < fp.y1;
        sem.at(y, x) = in ? rng.Between(0.6f, 0.9f) : rng.Between(0.0f, 0.1f);
      }
    }
    p.semantic_map = std::move(sem);
    p.instances.push_back(InstanceRecord::Cropped(
        rng.Between(0.8f, 0.95f), fp, FillRect(rng, fp, 0.9f, 1.0f)));
    full.categories.push_back(std::move(cat));
  }

  scene.instance_only = SelectHeads(full, HeadSelection::kInstanceOnly);
  scene.semantic_only = SelectHeads(full, HeadSelection::kSemanticOnly);
  return scene;
}

std::string LabelMapDigest(const LabelMap& map) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::uint8_t byte : EncodeLabelMap(map)) {
    h ^= byte;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::vector<FixtureEntry> WriteFixtures(const std::filesystem::path& dir,
                                        const SynthSpec& spec_template,
                                        std::span<const std::uint64_t> seeds,
                                        const FusionConfig& config) {
  std::filesystem::create_directories(dir);
  std::vector<FixtureEntry> entries;
  nlohmann::json manifest;
  manifest["config"] = {{"tau", config.tau},
                        {"instance_conf_threshold",
                         config.instance_conf_threshold},
                        {"presence_gating", config.presence_gating}};
  manifest["spec"] = nlohmann::json::parse(SynthSpecToJson(spec_template));
  manifest["fixtures"] = nlohmann::json::array();
  for (std::uint64_t seed : seeds) {
    SynthSpec spec = spec_template;
    spec.seed = seed;
    const SynthScene scene = Generate(spec);
    FixtureEntry e;
    e.seed = seed;
    e.bundle = "scene_" + std::to_string(seed) + ".sov3";
    e.truth = "truth_" + std::to_string(seed) + ".lbl";
    e.classes = "classes_" + std::to_string(seed) + ".json";
    WriteBundleFile(scene.bundle, dir / e.bundle);
    WriteLabelMapFile(scene.truth, dir / e.truth);
    WriteClassTableFile(scene.classes, dir / e.classes);
    e.digest = LabelMapDigest(
        ReferencePipeline(scene.bundle, scene.classes, config));
    manifest["fixtures"].push_back({{"seed", e.seed},
                                    {"bundle", e.bundle},
                                    {"truth", e.truth},
                                    {"classes", e.classes},
                                    {"digest", e.digest}});
    entries.push_back(std::move(e));
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
  return entries;
}

}  // namespace segfuse
