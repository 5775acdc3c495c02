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

#include "segfuse/oracle.hpp"

#include <string>
#include <vector>

#include "segfuse/error.hpp"

namespace segfuse {

LabelMap ReferencePipeline(const HeadBundle& bundle, const ClassTable& classes,
                           const FusionConfig& config) {
  config.Validate();
  Validate(bundle);

  // Category record for each class-table entry; background gets none.
  std::vector<const CategoryRecord*> owner(classes.size(), nullptr);
  std::size_t scored_count = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes.background_index() && *classes.background_index() == i) {
      continue;
    }
    ++scored_count;
    for (const auto& cat : bundle.categories) {
      if (cat.name == classes.names()[i]) owner[i] = &cat;
    }
    if (owner[i] == nullptr) {
      throw ValidationError("class '" + classes.names()[i] +
                            "' has no bundle category");
    }
  }
  if (bundle.categories.size() != scored_count) {
    throw ValidationError("bundle has categories outside the class table");
  }
  if (scored_count == 0) {
    throw ValidationError("class table has no scored classes");
  }

  LabelMap out(bundle.height, bundle.width);
  for (std::uint32_t y = 0; y < bundle.height; ++y) {
    for (std::uint32_t x = 0; x < bundle.width; ++x) {
      bool have_best = false;
      float best = 0.0f;
      std::uint16_t best_label = 0;
      for (std::size_t i = 0; i < classes.size(); ++i) {
        const CategoryRecord* cat = owner[i];
        if (cat == nullptr) continue;

        float category_value = 0.0f;
        for (std::size_t p = 0; p < cat->prompts.size(); ++p) {
          const PromptRecord& prompt = cat->prompts[p];

          float instance_value = 0.0f;
          for (const InstanceRecord& inst : prompt.instances) {
            if (!(inst.confidence >= config.instance_conf_threshold)) continue;
            float mask = 0.0f;
            if (x >= inst.bbox.x0 && x < inst.bbox.x1 && y >= inst.bbox.y0 &&
                y < inst.bbox.y1) {
              const std::size_t local =
                  static_cast<std::size_t>(y - inst.bbox.y0) *
                      (inst.bbox.x1 - inst.bbox.x0) +
                  (x - inst.bbox.x0);
              mask = inst.values[local];
            }
            const float weighted = mask * inst.confidence;
            if (weighted > instance_value) instance_value = weighted;
          }

          float semantic_value = 0.0f;
          if (prompt.semantic_map) {
            semantic_value = prompt.semantic_map->at(y, x);
          }
          float fused = semantic_value > instance_value ? semantic_value
                                                        : instance_value;
          if (config.presence_gating) fused = fused * prompt.presence;

          if (p == 0 || fused > category_value) category_value = fused;
        }

        if (!have_best || category_value > best) {
          have_best = true;
          best = category_value;
          best_label = static_cast<std::uint16_t>(i);
        }
      }
      if (classes.background_index() && best < config.tau) {
        best_label = *classes.background_index();
      }
      out.at(y, x) = best_label;
    }
  }
  return out;
}

}  // namespace segfuse
