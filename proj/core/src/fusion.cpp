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

#include "segfuse/fusion.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "segfuse/error.hpp"

namespace segfuse {
namespace {

void CheckInstanceFits(const InstanceRecord& inst, std::uint32_t height,
                       std::uint32_t width, std::size_t k) {
  const BBox& b = inst.bbox;
  const bool dense_ok = inst.encoding != InstanceEncoding::kDense ||
                        (b == BBox{0, 0, width, height});
  if (!dense_ok || b.x0 > b.x1 || b.y0 > b.y1 || b.x1 > width ||
      b.y1 > height || inst.values.size() != b.area()) {
    throw ValidationError("instances[" + std::to_string(k) +
                          "]: extent does not fit a " +
                          std::to_string(height) + "x" +
                          std::to_string(width) + " map");
  }
}

// out = max(out, values * confidence) over the instance window. Pixels
// outside the window contribute 0, which never raises a non-negative map.
void MaxWeightedInto(ProbMap& out, const InstanceRecord& inst) {
  const BBox& b = inst.bbox;
  const std::uint32_t w = b.width();
  const float conf = inst.confidence;
  for (std::uint32_t y = b.y0; y < b.y1; ++y) {
    const float* src =
        inst.values.data() + static_cast<std::size_t>(y - b.y0) * w;
    float* dst = out.row(y).data() + b.x0;
    for (std::uint32_t x = 0; x < w; ++x) {
      const float v = src[x] * conf;
      dst[x] = v > dst[x] ? v : dst[x];
    }
  }
}

void MaxInto(std::span<float> acc, std::span<const float> other) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    acc[i] = other[i] > acc[i] ? other[i] : acc[i];
  }
}

void ScaleInPlace(std::span<float> values, float factor) {
  for (float& v : values) v *= factor;
}

void RequireSameShape(const ProbMap& a, const ProbMap& b, const char* what) {
  if (!a.SameShape(b)) {
    throw ValidationError(std::string(what) + ": dimension mismatch " +
                          std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " vs " +
                          std::to_string(b.height()) + "x" +
                          std::to_string(b.width()));
  }
}

// Gated, prompt-reduced map of one category, computed in place.
ProbMap FuseCategory(const CategoryRecord& cat, std::uint32_t height,
                     std::uint32_t width, const FusionConfig& config) {
  ProbMap result;
  ProbMap scratch(height, width);
  bool first = true;
  for (const auto& prompt : cat.prompts) {
    ProbMap& map = first ? result : scratch;
    if (first) {
      map = ProbMap(height, width);
    } else {
      std::fill(map.values().begin(), map.values().end(), 0.0f);
    }
    for (const auto& inst : prompt.instances) {
      if (inst.confidence >= config.instance_conf_threshold) {
        MaxWeightedInto(map, inst);
      }
    }
    if (prompt.semantic_map) MaxInto(map.values(), prompt.semantic_map->values());
    if (config.presence_gating) ScaleInPlace(map.values(), prompt.presence);
    if (!first) MaxInto(result.values(), scratch.values());
    first = false;
  }
  return result;
}

void CheckCategoryNames(const HeadBundle& bundle, const ClassTable& classes) {
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  std::unordered_set<std::string_view> scored;
  for (std::uint16_t idx : classes.ScoredIndices()) {
    scored.insert(classes.name(idx));
    if (bundle.FindCategory(classes.name(idx)) == nullptr) {
      missing.push_back(classes.name(idx));
    }
  }
  for (const auto& cat : bundle.categories) {
    if (!scored.contains(cat.name)) extra.push_back(cat.name);
  }
  if (missing.empty() && extra.empty()) return;
  auto join = [](const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) s += ", ";
      s += "\"" + v[i] + "\"";
    }
    return s + "]";
  };
  throw ValidationError("bundle categories do not match class table: missing " +
                        join(missing) + ", extra " + join(extra));
}

}  // namespace

void FusionConfig::Validate() const {
  CheckProbability(tau, "tau");
  CheckProbability(instance_conf_threshold, "instance_conf_threshold");
}

FusionConfig ParseFusionConfig(std::string_view json_text, FusionConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("fusion config: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("fusion config: expected an object");
  auto number = [&](const char* key, float& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) {
      throw ValidationError(std::string(key) + ": expected a number");
    }
    out = j[key].get<float>();
  };
  number("tau", base.tau);
  number("instance_conf_threshold", base.instance_conf_threshold);
  if (j.contains("presence_gating")) {
    if (!j["presence_gating"].is_boolean()) {
      throw ValidationError("presence_gating: expected a boolean");
    }
    base.presence_gating = j["presence_gating"].get<bool>();
  }
  base.Validate();
  return base;
}

std::vector<InstanceRecord> FilterInstances(
    std::span<const InstanceRecord> instances, float threshold) {
  CheckProbability(threshold, "threshold");
  std::vector<InstanceRecord> out;
  for (const auto& inst : instances) {
    if (inst.confidence >= threshold) out.push_back(inst);
  }
  return out;
}

ProbMap AggregateInstances(std::span<const InstanceRecord> instances,
                           std::uint32_t height, std::uint32_t width) {
  ProbMap out(height, width);
  for (std::size_t k = 0; k < instances.size(); ++k) {
    CheckInstanceFits(instances[k], height, width, k);
  }
  for (const auto& inst : instances) MaxWeightedInto(out, inst);
  return out;
}

ProbMap FuseDualHead(const ProbMap* semantic, const ProbMap& instance_agg) {
  ProbMap out = instance_agg;
  if (semantic != nullptr) {
    RequireSameShape(*semantic, instance_agg, "fuse_dual_head");
    MaxInto(out.values(), semantic->values());
  }
  return out;
}

ProbMap ApplyPresence(ProbMap fused, float presence, bool enabled) {
  CheckProbability(presence, "presence");
  if (enabled) ScaleInPlace(fused.values(), presence);
  return fused;
}

ProbMap ReducePrompts(std::span<const ProbMap> gated_maps) {
  if (gated_maps.empty()) {
    throw ValidationError("reduce_prompts: at least one map required");
  }
  ProbMap out = gated_maps.front();
  for (std::size_t i = 1; i < gated_maps.size(); ++i) {
    RequireSameShape(out, gated_maps[i], "reduce_prompts");
    MaxInto(out.values(), gated_maps[i].values());
  }
  return out;
}

LabelMap LabelArgmax(std::span<const ProbMap> category_maps,
                     const ClassTable& classes, float tau,
                     const ExecutionOptions& exec) {
  CheckProbability(tau, "tau");
  const auto scored = classes.ScoredIndices();
  if (category_maps.size() != scored.size()) {
    throw ValidationError("label_argmax: " +
                          std::to_string(category_maps.size()) +
                          " maps for " + std::to_string(scored.size()) +
                          " scored classes");
  }
  if (category_maps.empty()) {
    throw ValidationError("label_argmax: class table has no scored classes");
  }
  for (const auto& m : category_maps) {
    RequireSameShape(category_maps.front(), m, "label_argmax");
  }
  const std::uint32_t height = category_maps.front().height();
  const std::uint32_t width = category_maps.front().width();
  const auto background = classes.background_index();
  LabelMap labels(height, width);
  internal::ParallelFor(height, exec, [&](std::size_t yi) {
    const auto y = static_cast<std::uint32_t>(yi);
    auto out = labels.row(y);
    std::vector<float> best(category_maps.front().row(y).begin(),
                            category_maps.front().row(y).end());
    std::fill(out.begin(), out.end(), scored.front());
    for (std::size_t c = 1; c < category_maps.size(); ++c) {
      const auto row = category_maps[c].row(y);
      for (std::uint32_t x = 0; x < width; ++x) {
        if (row[x] > best[x]) {
          best[x] = row[x];
          out[x] = scored[c];
        }
      }
    }
    if (background) {
      for (std::uint32_t x = 0; x < width; ++x) {
        if (best[x] < tau) out[x] = *background;
      }
    }
  });
  return labels;
}

std::vector<ProbMap> CategoryMaps(const HeadBundle& bundle,
                                  const ClassTable& classes,
                                  const FusionConfig& config,
                                  const ExecutionOptions& exec) {
  config.Validate();
  Validate(bundle);
  CheckCategoryNames(bundle, classes);
  const auto scored = classes.ScoredIndices();
  std::vector<ProbMap> maps(scored.size());
  internal::ParallelFor(scored.size(), exec, [&](std::size_t i) {
    const CategoryRecord* cat = bundle.FindCategory(classes.name(scored[i]));
    maps[i] = FuseCategory(*cat, bundle.height, bundle.width, config);
  });
  return maps;
}

LabelMap RunPipeline(const HeadBundle& bundle, const ClassTable& classes,
                     const FusionConfig& config,
                     const ExecutionOptions& exec) {
  const auto maps = CategoryMaps(bundle, classes, config, exec);
  return LabelArgmax(maps, classes, config.tau, exec);
}

}  // namespace segfuse
