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

#include "segfuse/prob_map.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "segfuse/error.hpp"

namespace segfuse {

ProbMap::ProbMap(std::uint32_t height, std::uint32_t width)
    : height_(height), width_(width) {
  if (height == 0 || width == 0) {
    throw ValidationError("map dimensions must be >= 1, got " +
                          std::to_string(height) + "x" +
                          std::to_string(width));
  }
  values_.assign(static_cast<std::size_t>(height) * width, 0.0f);
}

ProbMap ProbMap::FromValues(std::uint32_t height, std::uint32_t width,
                            std::vector<float> values, std::string_view what) {
  if (height == 0 || width == 0) {
    throw ValidationError(std::string(what) + ": map dimensions must be >= 1");
  }
  const std::size_t expected = static_cast<std::size_t>(height) * width;
  if (values.size() != expected) {
    throw ValidationError(std::string(what) + ": expected " +
                          std::to_string(expected) + " values, got " +
                          std::to_string(values.size()));
  }
  CheckProbabilities(values, what);
  ProbMap map;
  map.height_ = height;
  map.width_ = width;
  map.values_ = std::move(values);
  return map;
}

bool ProbMap::BitEqual(const ProbMap& other) const {
  return height_ == other.height_ && width_ == other.width_ &&
         (values_.empty() ||
          std::memcmp(values_.data(), other.values_.data(),
                      values_.size() * sizeof(float)) == 0);
}

void CheckProbabilities(std::span<const float> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ValidationError(std::string(what) + "[" + std::to_string(i) +
                            "]: value out of [0,1]: " + std::to_string(v));
    }
  }
}

void CheckProbability(float p, std::string_view what) {
  if (!(p >= 0.0f && p <= 1.0f)) {
    throw ValidationError(std::string(what) + ": value out of [0,1]: " +
                          std::to_string(p));
  }
}

}  // namespace segfuse
