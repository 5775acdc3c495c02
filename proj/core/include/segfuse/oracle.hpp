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

#ifndef SEGFUSE_ORACLE_HPP_
#define SEGFUSE_ORACLE_HPP_

#include "segfuse/bundle.hpp"
#include "segfuse/class_table.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/label_map.hpp"

namespace segfuse {

// Literal per-pixel evaluation of the fusion rules: for every pixel, every
// category, every prompt and every instance, with no tiling, threading or
// shared helpers from the production path. It is the reference that
// RunPipeline must match bit for bit.
LabelMap ReferencePipeline(const HeadBundle& bundle, const ClassTable& classes,
                           const FusionConfig& config);

}  // namespace segfuse

#endif  // SEGFUSE_ORACLE_HPP_
