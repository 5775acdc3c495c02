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

#ifndef SEGFUSE_METRICS_HPP_
#define SEGFUSE_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "segfuse/class_table.hpp"
#include "segfuse/label_map.hpp"

namespace segfuse {

// C x C pixel counts; rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes);

  std::size_t size() const { return size_; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts_[truth * size_ + pred];
  }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t c) const;
  std::uint64_t col_sum(std::size_t c) const;

  // Pixels with valid truth whose prediction was the ignore index. They are
  // left out of the matrix and tallied here per truth class.
  std::uint64_t unassigned(std::size_t truth) const {
    return unassigned_[truth];
  }
  std::uint64_t unassigned_total() const;

  // Skips pixels whose truth is kIgnoreIndex. Throws ValidationError on a
  // dimension mismatch or a label >= size(); the matrix is unchanged then.
  void Accumulate(const LabelMap& prediction, const LabelMap& truth);

  // Elementwise addition; sizes must match.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> unassigned_;
};

// diag / (row + col - diag); nullopt when the union is empty.
std::vector<std::optional<double>> IouPerClass(const ConfusionMatrix& cm);

// Mean of defined IoUs. Throws ValidationError("no evaluable classes").
double MeanIou(const ConfusionMatrix& cm);

struct MetricsReport {
  std::vector<std::string> class_names;
  std::vector<std::optional<double>> iou;
  std::optional<double> miou;
  std::uint64_t evaluated_pixels = 0;
  std::uint64_t unassigned_pixels = 0;
  std::vector<std::uint64_t> truth_pixels;
  std::vector<std::uint64_t> predicted_pixels;
};

MetricsReport MakeReport(const ConfusionMatrix& cm, const ClassTable& classes);
std::string ReportToJson(const MetricsReport& report);
std::string ReportToText(const MetricsReport& report);

}  // namespace segfuse

#endif  // SEGFUSE_METRICS_HPP_
