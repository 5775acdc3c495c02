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

#ifndef SEGFUSE_FUSION_HPP_
#define SEGFUSE_FUSION_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "segfuse/bundle.hpp"
#include "segfuse/class_table.hpp"
#include "segfuse/label_map.hpp"
#include "segfuse/prob_map.hpp"

namespace segfuse {

// Per-dataset tunables. Ties in the argmax always go to the lowest class
// index; there is no knob for it.
struct FusionConfig {
  // Pixels whose best gated score is strictly below tau fall to the
  // background class, when the class table has one.
  float tau = 0.5f;
  // Decoder queries with confidence below this are dropped before
  // aggregation.
  float instance_conf_threshold = 0.5f;
  // Multiply each prompt's fused map by its presence score.
  bool presence_gating = true;

  void Validate() const;
};

// Parses {"tau": f, "instance_conf_threshold": f, "presence_gating": b}.
// Missing keys keep the values already in `base`.
FusionConfig ParseFusionConfig(std::string_view json_text,
                               FusionConfig base = {});

struct ExecutionOptions {
  // Worker threads; 1 runs everything on the calling thread.
  int threads = 1;
};

// Instances with confidence >= threshold, order preserved.
std::vector<InstanceRecord> FilterInstances(
    std::span<const InstanceRecord> instances, float threshold);

// out(y, x) = max_k values_k(y, x) * confidence_k; zero when empty.
ProbMap AggregateInstances(std::span<const InstanceRecord> instances,
                           std::uint32_t height, std::uint32_t width);

// Per-pixel max of the semantic map and the instance aggregate. A missing
// semantic map contributes zeros.
ProbMap FuseDualHead(const ProbMap* semantic, const ProbMap& instance_agg);

// Multiplies every value by `presence` when enabled.
ProbMap ApplyPresence(ProbMap fused, float presence, bool enabled);

// Per-pixel max over the prompt maps of one category.
ProbMap ReducePrompts(std::span<const ProbMap> gated_maps);

// `category_maps[i]` belongs to classes.ScoredIndices()[i].
LabelMap LabelArgmax(std::span<const ProbMap> category_maps,
                     const ClassTable& classes, float tau,
                     const ExecutionOptions& exec = {});

// Final per-category maps of a bundle, in classes.ScoredIndices() order.
// Bundle category names must match the scored class names exactly.
std::vector<ProbMap> CategoryMaps(const HeadBundle& bundle,
                                  const ClassTable& classes,
                                  const FusionConfig& config,
                                  const ExecutionOptions& exec = {});

// Filter, aggregate, fuse, gate and reduce per category, then label.
LabelMap RunPipeline(const HeadBundle& bundle, const ClassTable& classes,
                     const FusionConfig& config,
                     const ExecutionOptions& exec = {});

}  // namespace segfuse

#endif  // SEGFUSE_FUSION_HPP_
