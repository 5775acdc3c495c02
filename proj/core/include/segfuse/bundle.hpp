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

#ifndef SEGFUSE_BUNDLE_HPP_
#define SEGFUSE_BUNDLE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segfuse/prob_map.hpp"

namespace segfuse {

// Pixel window [x0, x1) x [y0, y1).
struct BBox {
  std::uint32_t x0 = 0;
  std::uint32_t y0 = 0;
  std::uint32_t x1 = 0;
  std::uint32_t y1 = 0;

  std::uint32_t width() const { return x1 - x0; }
  std::uint32_t height() const { return y1 - y0; }
  std::uint64_t area() const {
    return static_cast<std::uint64_t>(width()) * height();
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class InstanceEncoding : std::uint8_t { kDense = 0, kBBoxCropped = 1 };

// One decoder query: a mask probability raster and its confidence.
// Dense instances carry a full-image bbox; cropped instances carry only the
// bbox window, and every pixel outside it is 0.
struct InstanceRecord {
  float confidence = 0.0f;
  InstanceEncoding encoding = InstanceEncoding::kDense;
  BBox bbox;
  std::vector<float> values;

  static InstanceRecord Dense(float confidence, const ProbMap& mask);
  static InstanceRecord Cropped(float confidence, BBox bbox,
                                std::vector<float> values);

  float at_window(std::uint32_t y, std::uint32_t x) const {
    return values[static_cast<std::size_t>(y - bbox.y0) * bbox.width() +
                  (x - bbox.x0)];
  }
};

struct PromptRecord {
  std::string prompt_text;
  float presence = 0.0f;
  std::optional<ProbMap> semantic_map;
  std::vector<InstanceRecord> instances;
};

struct CategoryRecord {
  std::string name;
  std::vector<PromptRecord> prompts;
};

// All per-prompt head outputs for one image tile.
struct HeadBundle {
  std::string image_id;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<CategoryRecord> categories;

  const CategoryRecord* FindCategory(std::string_view name) const;
};

// Throws ValidationError naming the first offending field, e.g.
// "categories[1].prompts[0].instances[3].values[17]: value out of [0,1]".
void Validate(const HeadBundle& bundle);

// Field-by-field equality with float payloads compared by bit pattern.
bool BitEqual(const HeadBundle& a, const HeadBundle& b);
bool BitEqual(const InstanceRecord& a, const InstanceRecord& b);

// Expands any instance to a dense H x W raster.
ProbMap ExpandDense(const InstanceRecord& instance, std::uint32_t height,
                    std::uint32_t width);

// Re-encodes an instance as bbox-cropped around its non-zero support. An
// all-zero instance becomes an empty bbox at the origin.
InstanceRecord CropToSupport(const InstanceRecord& instance,
                             std::uint32_t height, std::uint32_t width);

// Sub-bundle for `window`: semantic maps and instances are cut to the
// window, and presence scores are copied unchanged.
HeadBundle CropBundle(const HeadBundle& bundle, const BBox& window);

// Which heads a bundle keeps when building ablation inputs.
enum class HeadSelection { kBoth, kInstanceOnly, kSemanticOnly };

// Drops semantic maps (kInstanceOnly) or instances (kSemanticOnly).
HeadBundle SelectHeads(const HeadBundle& bundle, HeadSelection heads);

// Diagnostics gathered while decoding.
struct ReadReport {
  // Values within 1e-6 outside [0, 1] that were clamped into range.
  std::uint64_t clamped_values = 0;
  // Field path of the first clamped value, empty when none were clamped.
  std::string first_clamped_field;
};

// SOV3 container. Returns the number of bytes written.
std::uint64_t WriteBundle(const HeadBundle& bundle, std::ostream& out);
HeadBundle ReadBundle(std::istream& in, ReadReport* report = nullptr);
HeadBundle ReadBundle(std::span<const std::uint8_t> bytes,
                      ReadReport* report = nullptr);
std::vector<std::uint8_t> EncodeBundle(const HeadBundle& bundle);

std::uint64_t WriteBundleFile(const HeadBundle& bundle,
                              const std::filesystem::path& path);
HeadBundle ReadBundleFile(const std::filesystem::path& path,
                          ReadReport* report = nullptr);

inline constexpr std::uint16_t kBundleVersion = 1;
inline constexpr double kRangeTolerance = 1e-6;

}  // namespace segfuse

#endif  // SEGFUSE_BUNDLE_HPP_
