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

#include "segfuse/label_map.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "byte_io.hpp"
#include "segfuse/class_table.hpp"
#include "segfuse/error.hpp"

namespace segfuse {
namespace {

constexpr std::uint8_t kMagic[4] = {0x4C, 0x42, 0x4C, 0x31};  // "LBL1"

}  // namespace

LabelMap::LabelMap(std::uint32_t height, std::uint32_t width,
                   std::uint16_t fill)
    : height_(height), width_(width) {
  if (height == 0 || width == 0) {
    throw ValidationError("label map dimensions must be >= 1");
  }
  labels_.assign(static_cast<std::size_t>(height) * width, fill);
}

LabelMap LabelMap::FromLabels(std::uint32_t height, std::uint32_t width,
                              std::vector<std::uint16_t> labels) {
  if (height == 0 || width == 0) {
    throw ValidationError("label map dimensions must be >= 1");
  }
  if (labels.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("label map: expected " +
                          std::to_string(static_cast<std::size_t>(height) *
                                         width) +
                          " labels, got " + std::to_string(labels.size()));
  }
  LabelMap m;
  m.height_ = height;
  m.width_ = width;
  m.labels_ = std::move(labels);
  return m;
}

void ValidateLabels(const LabelMap& map, const ClassTable& classes) {
  const auto labels = map.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kIgnoreIndex && labels[i] >= classes.size()) {
      throw ValidationError("labels[" + std::to_string(i) + "]: label " +
                            std::to_string(labels[i]) +
                            " >= class count " +
                            std::to_string(classes.size()));
    }
  }
}

std::uint64_t WriteLabelMap(const LabelMap& map, std::ostream& out) {
  if (map.size() == 0) throw ValidationError("label map is empty");
  internal::ByteWriter w(out);
  w.Bytes(kMagic, 4);
  w.U16(kLabelMapVersion);
  w.U16(0);
  w.U32(map.height());
  w.U32(map.width());
  w.U16Array(map.labels());
  out.flush();
  if (!out) throw IoError("flush failed");
  return w.count();
}

LabelMap ReadLabelMap(std::span<const std::uint8_t> bytes) {
  internal::ByteReader r(bytes);
  auto magic = r.Take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    throw FormatError("bad magic: not a label raster");
  }
  const std::uint16_t version = r.U16("version");
  if (version != kLabelMapVersion) {
    throw FormatError("unsupported label raster version " +
                      std::to_string(version));
  }
  r.U16("reserved");
  const std::uint32_t height = r.U32("height");
  const std::uint32_t width = r.U32("width");
  if (height == 0 || width == 0) {
    throw FormatError("label raster header declares an empty raster");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(height) * width;
  auto labels = r.U16Array(count, "label raster body");
  if (r.remaining() != 0) {
    throw FormatError("label raster body has " +
                      std::to_string(r.remaining()) +
                      " bytes beyond the declared " + std::to_string(height) +
                      "x" + std::to_string(width));
  }
  return LabelMap::FromLabels(height, width, std::move(labels));
}

LabelMap ReadLabelMap(std::istream& in) {
  const auto bytes = internal::ReadAll(in);
  return ReadLabelMap(bytes);
}

std::vector<std::uint8_t> EncodeLabelMap(const LabelMap& map) {
  std::ostringstream out(std::ios::binary);
  WriteLabelMap(map, out);
  const std::string s = std::move(out).str();
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

std::uint64_t WriteLabelMapFile(const LabelMap& map,
                                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return WriteLabelMap(map, out);
}

LabelMap ReadLabelMapFile(const std::filesystem::path& path) {
  return ReadLabelMap(internal::ReadFileBytes(path));
}

}  // namespace segfuse
