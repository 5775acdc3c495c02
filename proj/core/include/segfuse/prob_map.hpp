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

#ifndef SEGFUSE_PROB_MAP_HPP_
#define SEGFUSE_PROB_MAP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace segfuse {

// Dense row-major H x W raster of probabilities, origin at the top-left.
// Every value is finite and within [0, 1].
class ProbMap {
 public:
  ProbMap() = default;

  // All-zero map. Throws ValidationError on a zero dimension.
  ProbMap(std::uint32_t height, std::uint32_t width);

  // Takes ownership of `values` after checking size and range. `what` names
  // the field in error messages.
  static ProbMap FromValues(std::uint32_t height, std::uint32_t width,
                            std::vector<float> values,
                            std::string_view what = "values");

  std::uint32_t height() const { return height_; }
  std::uint32_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  float at(std::uint32_t y, std::uint32_t x) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  float& at(std::uint32_t y, std::uint32_t x) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }
  std::span<const float> row(std::uint32_t y) const {
    return std::span<const float>(values_).subspan(
        static_cast<std::size_t>(y) * width_, width_);
  }
  std::span<float> row(std::uint32_t y) {
    return std::span<float>(values_).subspan(
        static_cast<std::size_t>(y) * width_, width_);
  }

  bool SameShape(const ProbMap& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  // Bit-pattern equality of every value.
  bool BitEqual(const ProbMap& other) const;

  friend bool operator==(const ProbMap& a, const ProbMap& b) {
    return a.BitEqual(b);
  }

 private:
  std::uint32_t height_ = 0;
  std::uint32_t width_ = 0;
  std::vector<float> values_;
};

// Throws ValidationError unless every value is finite and within [0, 1].
void CheckProbabilities(std::span<const float> values, std::string_view what);

// Throws ValidationError unless `p` is finite and within [0, 1].
void CheckProbability(float p, std::string_view what);

}  // namespace segfuse

#endif  // SEGFUSE_PROB_MAP_HPP_
