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

#ifndef SEGFUSE_LABEL_MAP_HPP_
#define SEGFUSE_LABEL_MAP_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace segfuse {

inline constexpr std::uint16_t kIgnoreIndex = 65535;

class ClassTable;

// H x W raster of class-table indices; kIgnoreIndex marks unlabeled pixels.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(std::uint32_t height, std::uint32_t width,
           std::uint16_t fill = 0);
  static LabelMap FromLabels(std::uint32_t height, std::uint32_t width,
                             std::vector<std::uint16_t> labels);

  std::uint32_t height() const { return height_; }
  std::uint32_t width() const { return width_; }
  std::size_t size() const { return labels_.size(); }

  std::uint16_t at(std::uint32_t y, std::uint32_t x) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint16_t& at(std::uint32_t y, std::uint32_t x) {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const std::uint16_t> labels() const { return labels_; }
  std::span<std::uint16_t> labels() { return labels_; }
  std::span<std::uint16_t> row(std::uint32_t y) {
    return std::span<std::uint16_t>(labels_).subspan(
        static_cast<std::size_t>(y) * width_, width_);
  }
  std::span<const std::uint16_t> row(std::uint32_t y) const {
    return std::span<const std::uint16_t>(labels_).subspan(
        static_cast<std::size_t>(y) * width_, width_);
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::uint32_t height_ = 0;
  std::uint32_t width_ = 0;
  std::vector<std::uint16_t> labels_;
};

// Throws ValidationError if any non-ignore label is >= classes.size().
void ValidateLabels(const LabelMap& map, const ClassTable& classes);

// Raw raster: "LBL1", u16 version, u16 reserved, u32 H, u32 W, then
// u16 x H x W, all little-endian.
std::uint64_t WriteLabelMap(const LabelMap& map, std::ostream& out);
LabelMap ReadLabelMap(std::istream& in);
LabelMap ReadLabelMap(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> EncodeLabelMap(const LabelMap& map);

std::uint64_t WriteLabelMapFile(const LabelMap& map,
                                const std::filesystem::path& path);
LabelMap ReadLabelMapFile(const std::filesystem::path& path);

inline constexpr std::uint16_t kLabelMapVersion = 1;
inline constexpr std::size_t kLabelMapHeaderSize = 16;

}  // namespace segfuse

#endif  // SEGFUSE_LABEL_MAP_HPP_
