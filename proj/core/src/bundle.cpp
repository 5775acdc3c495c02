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

#include "segfuse/bundle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>

#include "byte_io.hpp"
#include "segfuse/error.hpp"

namespace segfuse {
namespace {

constexpr std::uint8_t kMagic[4] = {0x53, 0x4F, 0x56, 0x33};  // "SOV3"

std::string CategoryPath(std::size_t c) {
  return "categories[" + std::to_string(c) + "]";
}
std::string PromptPath(std::size_t c, std::size_t p) {
  return CategoryPath(c) + ".prompts[" + std::to_string(p) + "]";
}
std::string InstancePath(std::size_t c, std::size_t p, std::size_t k) {
  return PromptPath(c, p) + ".instances[" + std::to_string(k) + "]";
}

void CheckText(const std::string& text, const std::string& field) {
  if (!internal::IsValidUtf8(text)) {
    throw ValidationError(field + ": invalid UTF-8");
  }
}

void CheckBBox(const BBox& b, std::uint32_t height, std::uint32_t width,
               const std::string& field) {
  if (b.x0 > b.x1 || b.y0 > b.y1 || b.x1 > width || b.y1 > height) {
    throw ValidationError(field + ": bbox (" + std::to_string(b.x0) + "," +
                          std::to_string(b.y0) + "," + std::to_string(b.x1) +
                          "," + std::to_string(b.y1) +
                          ") outside image bounds " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
}

void CheckInstance(const InstanceRecord& inst, std::uint32_t height,
                   std::uint32_t width, const std::string& field) {
  CheckProbability(inst.confidence, field + ".confidence");
  if (inst.encoding == InstanceEncoding::kDense) {
    if (inst.bbox != BBox{0, 0, width, height}) {
      throw ValidationError(field + ".bbox: dense instance must span the image");
    }
  } else if (inst.encoding != InstanceEncoding::kBBoxCropped) {
    throw ValidationError(field + ".encoding: unknown encoding");
  }
  CheckBBox(inst.bbox, height, width, field + ".bbox");
  if (inst.values.size() != inst.bbox.area()) {
    throw ValidationError(field + ".values: expected " +
                          std::to_string(inst.bbox.area()) + " values, got " +
                          std::to_string(inst.values.size()));
  }
  CheckProbabilities(inst.values, field + ".values");
}

// Decoded values within kRangeTolerance of [0, 1] are clamped; anything else
// out of range, or NaN, is rejected.
class RangeGuard {
 public:
  explicit RangeGuard(ReadReport* report) : report_(report) {}

  float Scalar(float v, const std::string& field) {
    if (v >= 0.0f && v <= 1.0f) return v;
    return Fix(v, field);
  }

  void Array(std::span<float> values, const std::string& field) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const float v = values[i];
      if (v >= 0.0f && v <= 1.0f) continue;
      values[i] = Fix(v, field + "[" + std::to_string(i) + "]");
    }
  }

 private:
  float Fix(float v, const std::string& field) {
    const double d = v;
    if (std::isnan(v) || d < -kRangeTolerance || d > 1.0 + kRangeTolerance) {
      throw ValidationError(field + ": value out of [0,1]: " +
                            std::to_string(v));
    }
    if (report_ != nullptr) {
      if (report_->clamped_values == 0) report_->first_clamped_field = field;
      ++report_->clamped_values;
    }
    return d < 0.0 ? 0.0f : 1.0f;
  }

  ReadReport* report_;
};

}  // namespace

InstanceRecord InstanceRecord::Dense(float confidence, const ProbMap& mask) {
  InstanceRecord r;
  r.confidence = confidence;
  r.encoding = InstanceEncoding::kDense;
  r.bbox = BBox{0, 0, mask.width(), mask.height()};
  r.values.assign(mask.values().begin(), mask.values().end());
  return r;
}

InstanceRecord InstanceRecord::Cropped(float confidence, BBox bbox,
                                       std::vector<float> values) {
  InstanceRecord r;
  r.confidence = confidence;
  r.encoding = InstanceEncoding::kBBoxCropped;
  r.bbox = bbox;
  r.values = std::move(values);
  return r;
}

const CategoryRecord* HeadBundle::FindCategory(std::string_view name) const {
  for (const auto& c : categories) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void Validate(const HeadBundle& bundle) {
  CheckText(bundle.image_id, "image_id");
  if (bundle.height == 0) throw ValidationError("height: must be >= 1");
  if (bundle.width == 0) throw ValidationError("width: must be >= 1");
  if (bundle.categories.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ValidationError("categories: more than 65535 entries");
  }
  std::unordered_set<std::string_view> names;
  for (std::size_t c = 0; c < bundle.categories.size(); ++c) {
    const auto& cat = bundle.categories[c];
    CheckText(cat.name, CategoryPath(c) + ".name");
    if (!names.insert(cat.name).second) {
      throw ValidationError(CategoryPath(c) + ".name: duplicate category '" +
                            cat.name + "'");
    }
    if (cat.prompts.empty()) {
      throw ValidationError(CategoryPath(c) + ".prompts: at least one prompt "
                                              "required");
    }
    if (cat.prompts.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ValidationError(CategoryPath(c) + ".prompts: more than 65535");
    }
    std::unordered_set<std::string_view> texts;
    for (std::size_t p = 0; p < cat.prompts.size(); ++p) {
      const auto& prompt = cat.prompts[p];
      const std::string path = PromptPath(c, p);
      CheckText(prompt.prompt_text, path + ".prompt_text");
      if (!texts.insert(prompt.prompt_text).second) {
        throw ValidationError(path + ".prompt_text: duplicate prompt '" +
                              prompt.prompt_text + "'");
      }
      CheckProbability(prompt.presence, path + ".presence");
      if (prompt.semantic_map) {
        const auto& m = *prompt.semantic_map;
        if (m.height() != bundle.height || m.width() != bundle.width) {
          throw ValidationError(path + ".semantic_map: dimensions " +
                                std::to_string(m.height()) + "x" +
                                std::to_string(m.width()) +
                                " do not match bundle");
        }
        CheckProbabilities(m.values(), path + ".semantic_map");
      }
      for (std::size_t k = 0; k < prompt.instances.size(); ++k) {
        CheckInstance(prompt.instances[k], bundle.height, bundle.width,
                      InstancePath(c, p, k));
      }
    }
  }
}

bool BitEqual(const InstanceRecord& a, const InstanceRecord& b) {
  return std::bit_cast<std::uint32_t>(a.confidence) ==
             std::bit_cast<std::uint32_t>(b.confidence) &&
         a.encoding == b.encoding && a.bbox == b.bbox &&
         a.values.size() == b.values.size() &&
         (a.values.empty() ||
          std::memcmp(a.values.data(), b.values.data(),
                      a.values.size() * sizeof(float)) == 0);
}

bool BitEqual(const HeadBundle& a, const HeadBundle& b) {
  if (a.image_id != b.image_id || a.height != b.height ||
      a.width != b.width || a.categories.size() != b.categories.size()) {
    return false;
  }
  for (std::size_t c = 0; c < a.categories.size(); ++c) {
    const auto& ca = a.categories[c];
    const auto& cb = b.categories[c];
    if (ca.name != cb.name || ca.prompts.size() != cb.prompts.size()) {
      return false;
    }
    for (std::size_t p = 0; p < ca.prompts.size(); ++p) {
      const auto& pa = ca.prompts[p];
      const auto& pb = cb.prompts[p];
      if (pa.prompt_text != pb.prompt_text ||
          std::bit_cast<std::uint32_t>(pa.presence) !=
              std::bit_cast<std::uint32_t>(pb.presence) ||
          pa.semantic_map.has_value() != pb.semantic_map.has_value() ||
          (pa.semantic_map && !pa.semantic_map->BitEqual(*pb.semantic_map)) ||
          pa.instances.size() != pb.instances.size()) {
        return false;
      }
      for (std::size_t k = 0; k < pa.instances.size(); ++k) {
        if (!BitEqual(pa.instances[k], pb.instances[k])) return false;
      }
    }
  }
  return true;
}

ProbMap ExpandDense(const InstanceRecord& instance, std::uint32_t height,
                    std::uint32_t width) {
  CheckBBox(instance.bbox, height, width, "instance.bbox");
  ProbMap out(height, width);
  const BBox& b = instance.bbox;
  for (std::uint32_t y = b.y0; y < b.y1; ++y) {
    for (std::uint32_t x = b.x0; x < b.x1; ++x) {
      out.at(y, x) = instance.at_window(y, x);
    }
  }
  return out;
}

InstanceRecord CropToSupport(const InstanceRecord& instance,
                             std::uint32_t height, std::uint32_t width) {
  const ProbMap dense = ExpandDense(instance, height, width);
  BBox tight{width, height, 0, 0};
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      if (dense.at(y, x) != 0.0f) {
        tight.x0 = std::min(tight.x0, x);
        tight.y0 = std::min(tight.y0, y);
        tight.x1 = std::max(tight.x1, x + 1);
        tight.y1 = std::max(tight.y1, y + 1);
      }
    }
  }
  if (tight.x1 == 0) tight = BBox{};
  std::vector<float> values;
  values.reserve(tight.area());
  for (std::uint32_t y = tight.y0; y < tight.y1; ++y) {
    for (std::uint32_t x = tight.x0; x < tight.x1; ++x) {
      values.push_back(dense.at(y, x));
    }
  }
  return InstanceRecord::Cropped(instance.confidence, tight, std::move(values));
}

HeadBundle CropBundle(const HeadBundle& bundle, const BBox& window) {
  CheckBBox(window, bundle.height, bundle.width, "window");
  if (window.area() == 0) throw ValidationError("window: empty");
  HeadBundle out;
  out.image_id = bundle.image_id;
  out.height = window.height();
  out.width = window.width();
  out.categories.reserve(bundle.categories.size());
  for (const auto& cat : bundle.categories) {
    CategoryRecord oc{cat.name, {}};
    oc.prompts.reserve(cat.prompts.size());
    for (const auto& prompt : cat.prompts) {
      PromptRecord op;
      op.prompt_text = prompt.prompt_text;
      op.presence = prompt.presence;
      if (prompt.semantic_map) {
        ProbMap m(out.height, out.width);
        for (std::uint32_t y = 0; y < out.height; ++y) {
          auto src = prompt.semantic_map->row(window.y0 + y)
                         .subspan(window.x0, out.width);
          std::copy(src.begin(), src.end(), m.row(y).begin());
        }
        op.semantic_map = std::move(m);
      }
      for (const auto& inst : prompt.instances) {
        const BBox& b = inst.bbox;
        BBox cut{std::max(b.x0, window.x0), std::max(b.y0, window.y0),
                 std::min(b.x1, window.x1), std::min(b.y1, window.y1)};
        if (cut.x0 >= cut.x1 || cut.y0 >= cut.y1) cut = BBox{};
        std::vector<float> values;
        values.reserve(cut.area());
        for (std::uint32_t y = cut.y0; y < cut.y1; ++y) {
          for (std::uint32_t x = cut.x0; x < cut.x1; ++x) {
            values.push_back(inst.at_window(y, x));
          }
        }
        BBox local = cut.area() == 0
                         ? BBox{}
                         : BBox{cut.x0 - window.x0, cut.y0 - window.y0,
                                cut.x1 - window.x0, cut.y1 - window.y0};
        InstanceRecord oi = InstanceRecord::Cropped(inst.confidence, local,
                                                    std::move(values));
        if (inst.encoding == InstanceEncoding::kDense) {
          oi.encoding = InstanceEncoding::kDense;
        }
        op.instances.push_back(std::move(oi));
      }
      oc.prompts.push_back(std::move(op));
    }
    out.categories.push_back(std::move(oc));
  }
  return out;
}

HeadBundle SelectHeads(const HeadBundle& bundle, HeadSelection heads) {
  HeadBundle out = bundle;
  for (auto& cat : out.categories) {
    for (auto& prompt : cat.prompts) {
      if (heads == HeadSelection::kInstanceOnly) prompt.semantic_map.reset();
      if (heads == HeadSelection::kSemanticOnly) prompt.instances.clear();
    }
  }
  return out;
}

std::uint64_t WriteBundle(const HeadBundle& bundle, std::ostream& out) {
  Validate(bundle);
  internal::ByteWriter w(out);
  w.Bytes(kMagic, 4);
  w.U16(kBundleVersion);
  w.U16(0);
  w.String(bundle.image_id);
  w.U32(bundle.height);
  w.U32(bundle.width);
  w.U16(static_cast<std::uint16_t>(bundle.categories.size()));
  for (const auto& cat : bundle.categories) {
    w.String(cat.name);
    w.U16(static_cast<std::uint16_t>(cat.prompts.size()));
    for (const auto& prompt : cat.prompts) {
      w.String(prompt.prompt_text);
      w.F32(prompt.presence);
      w.U8(prompt.semantic_map ? 1 : 0);
      if (prompt.semantic_map) w.F32Array(prompt.semantic_map->values());
      w.U32(static_cast<std::uint32_t>(prompt.instances.size()));
      for (const auto& inst : prompt.instances) {
        w.F32(inst.confidence);
        w.U8(static_cast<std::uint8_t>(inst.encoding));
        if (inst.encoding == InstanceEncoding::kBBoxCropped) {
          w.U32(inst.bbox.x0);
          w.U32(inst.bbox.y0);
          w.U32(inst.bbox.x1);
          w.U32(inst.bbox.y1);
        }
        w.F32Array(inst.values);
      }
    }
  }
  out.flush();
  if (!out) throw IoError("flush failed");
  return w.count();
}

HeadBundle ReadBundle(std::span<const std::uint8_t> bytes, ReadReport* report) {
  internal::ByteReader r(bytes);
  RangeGuard guard(report);
  auto magic = r.Take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    throw FormatError("bad magic: not an SOV3 bundle");
  }
  const std::uint16_t version = r.U16("version");
  if (version != kBundleVersion) {
    throw FormatError("unsupported bundle version " + std::to_string(version));
  }
  const std::uint16_t flags = r.U16("flags");
  if (flags != 0) {
    throw FormatError("unsupported flags " + std::to_string(flags));
  }
  HeadBundle b;
  b.image_id = r.String("image_id");
  CheckText(b.image_id, "image_id");
  b.height = r.U32("height");
  b.width = r.U32("width");
  if (b.height == 0) throw ValidationError("height: must be >= 1");
  if (b.width == 0) throw ValidationError("width: must be >= 1");
  const std::uint64_t pixels = static_cast<std::uint64_t>(b.height) * b.width;

  const std::uint16_t category_count = r.U16("category count");
  std::unordered_set<std::string> names;
  for (std::size_t c = 0; c < category_count; ++c) {
    CategoryRecord cat;
    cat.name = r.String("category name");
    CheckText(cat.name, CategoryPath(c) + ".name");
    if (!names.insert(cat.name).second) {
      throw ValidationError(CategoryPath(c) + ".name: duplicate category '" +
                            cat.name + "'");
    }
    const std::uint16_t prompt_count = r.U16("prompt count");
    if (prompt_count == 0) {
      throw ValidationError(CategoryPath(c) +
                            ".prompts: at least one prompt required");
    }
    std::unordered_set<std::string> texts;
    for (std::size_t p = 0; p < prompt_count; ++p) {
      const std::string path = PromptPath(c, p);
      PromptRecord prompt;
      prompt.prompt_text = r.String("prompt text");
      CheckText(prompt.prompt_text, path + ".prompt_text");
      if (!texts.insert(prompt.prompt_text).second) {
        throw ValidationError(path + ".prompt_text: duplicate prompt '" +
                              prompt.prompt_text + "'");
      }
      prompt.presence = guard.Scalar(r.F32("presence"), path + ".presence");
      const std::uint8_t has_semantic = r.U8("semantic flag");
      if (has_semantic > 1) {
        throw FormatError(path + ".semantic_present: expected 0 or 1, got " +
                          std::to_string(has_semantic));
      }
      if (has_semantic == 1) {
        auto values = r.F32Array(pixels, "semantic map");
        guard.Array(values, path + ".semantic_map");
        prompt.semantic_map =
            ProbMap::FromValues(b.height, b.width, std::move(values),
                                path + ".semantic_map");
      }
      const std::uint32_t instance_count = r.U32("instance count");
      // Smallest instance record is 5 bytes (confidence + encoding).
      r.Require(static_cast<std::uint64_t>(instance_count) * 5,
                "instance records");
      prompt.instances.reserve(instance_count);
      for (std::size_t k = 0; k < instance_count; ++k) {
        const std::string ipath = InstancePath(c, p, k);
        InstanceRecord inst;
        inst.confidence =
            guard.Scalar(r.F32("instance confidence"), ipath + ".confidence");
        const std::uint8_t encoding = r.U8("instance encoding");
        if (encoding == 0) {
          inst.encoding = InstanceEncoding::kDense;
          inst.bbox = BBox{0, 0, b.width, b.height};
        } else if (encoding == 1) {
          inst.encoding = InstanceEncoding::kBBoxCropped;
          inst.bbox.x0 = r.U32("bbox");
          inst.bbox.y0 = r.U32("bbox");
          inst.bbox.x1 = r.U32("bbox");
          inst.bbox.y1 = r.U32("bbox");
          CheckBBox(inst.bbox, b.height, b.width, ipath + ".bbox");
        } else {
          throw FormatError(ipath + ".encoding: expected 0 or 1, got " +
                            std::to_string(encoding));
        }
        inst.values = r.F32Array(inst.bbox.area(), "instance values");
        guard.Array(inst.values, ipath + ".values");
        prompt.instances.push_back(std::move(inst));
      }
      cat.prompts.push_back(std::move(prompt));
    }
    b.categories.push_back(std::move(cat));
  }
  if (r.remaining() != 0) {
    throw FormatError("trailing garbage: " + std::to_string(r.remaining()) +
                      " bytes after bundle end at offset " +
                      std::to_string(r.offset()));
  }
  return b;
}

HeadBundle ReadBundle(std::istream& in, ReadReport* report) {
  const auto bytes = internal::ReadAll(in);
  return ReadBundle(bytes, report);
}

std::vector<std::uint8_t> EncodeBundle(const HeadBundle& bundle) {
  std::ostringstream out(std::ios::binary);
  WriteBundle(bundle, out);
  const std::string s = std::move(out).str();
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

std::uint64_t WriteBundleFile(const HeadBundle& bundle,
                              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return WriteBundle(bundle, out);
}

HeadBundle ReadBundleFile(const std::filesystem::path& path,
                          ReadReport* report) {
  const auto bytes = internal::ReadFileBytes(path);
  return ReadBundle(bytes, report);
}

}  // namespace segfuse
