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

#ifndef SEGFUSE_TOOLS_RENDER_HPP_
#define SEGFUSE_TOOLS_RENDER_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "segfuse/class_table.hpp"
#include "segfuse/label_map.hpp"

namespace segfuse::tools {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Entry i is the bit-interleaved PASCAL VOC colour of i + 1, so no class
// is black and all 256 entries are distinct.
const std::array<Rgb, 256>& DefaultPalette();

enum class IgnoreStyle { kTransparent, kBlack };

// One colour per class-table index.
struct Palette {
  std::vector<Rgb> colors;
};

// Starts from the default palette and applies overrides from a JSON object
// {"class name": [r, g, b], ...}. Blank text or "{}" keeps the defaults and
// adds a warning. Unknown class names throw ValidationError.
Palette ResolvePalette(const ClassTable& classes,
                       std::optional<std::string_view> palette_json,
                       std::vector<std::string>* warnings);

struct Image {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  // 3 (RGB) or 4 (RGBA).
  std::uint32_t channels = 3;
  std::vector<std::uint8_t> pixels;
};

// Ignore pixels become transparent (RGBA output) or black (RGB output).
Image RenderLabels(const LabelMap& labels, const Palette& palette,
                   IgnoreStyle ignore);

void WritePng(const Image& image, const std::filesystem::path& path);
Image ReadPng(const std::filesystem::path& path);

}  // namespace segfuse::tools

#endif  // SEGFUSE_TOOLS_RENDER_HPP_
