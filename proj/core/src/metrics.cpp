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

#include "segfuse/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "segfuse/error.hpp"

namespace segfuse {

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : size_(classes),
      counts_(classes * classes, 0),
      unassigned_(classes, 0) {
  if (classes == 0) throw ValidationError("confusion matrix: zero classes");
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < size_; ++p) s += at(c, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < size_; ++t) s += at(t, c);
  return s;
}

std::uint64_t ConfusionMatrix::unassigned_total() const {
  return std::accumulate(unassigned_.begin(), unassigned_.end(),
                         std::uint64_t{0});
}

void ConfusionMatrix::Accumulate(const LabelMap& prediction,
                                 const LabelMap& truth) {
  if (prediction.height() != truth.height() ||
      prediction.width() != truth.width()) {
    throw ValidationError("accumulate: prediction is " +
                          std::to_string(prediction.height()) + "x" +
                          std::to_string(prediction.width()) +
                          ", truth is " + std::to_string(truth.height()) +
                          "x" + std::to_string(truth.width()));
  }
  const auto pred = prediction.labels();
  const auto gt = truth.labels();
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] != kIgnoreIndex && gt[i] >= size_) {
      throw ValidationError("accumulate: truth label " + std::to_string(gt[i]) +
                            " >= class count " + std::to_string(size_));
    }
    if (pred[i] != kIgnoreIndex && pred[i] >= size_) {
      throw ValidationError("accumulate: predicted label " +
                            std::to_string(pred[i]) + " >= class count " +
                            std::to_string(size_));
    }
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kIgnoreIndex) continue;
    if (pred[i] == kIgnoreIndex) {
      ++unassigned_[gt[i]];
      continue;
    }
    ++counts_[static_cast<std::size_t>(gt[i]) * size_ + pred[i]];
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.size_ != size_) {
    throw ValidationError("confusion matrix merge: size mismatch");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  for (std::size_t i = 0; i < size_; ++i) unassigned_[i] += other.unassigned_[i];
  return *this;
}

std::vector<std::optional<double>> IouPerClass(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> out(cm.size());
  for (std::size_t c = 0; c < cm.size(); ++c) {
    const std::uint64_t diag = cm.at(c, c);
    const std::uint64_t uni = cm.row_sum(c) + cm.col_sum(c) - diag;
    if (uni > 0) {
      out[c] = static_cast<double>(diag) / static_cast<double>(uni);
    }
  }
  return out;
}

double MeanIou(const ConfusionMatrix& cm) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& iou : IouPerClass(cm)) {
    if (iou) {
      sum += *iou;
      ++n;
    }
  }
  if (n == 0) throw ValidationError("no evaluable classes");
  return sum / static_cast<double>(n);
}

MetricsReport MakeReport(const ConfusionMatrix& cm, const ClassTable& classes) {
  if (cm.size() != classes.size()) {
    throw ValidationError("report: matrix has " + std::to_string(cm.size()) +
                          " classes, table has " +
                          std::to_string(classes.size()));
  }
  MetricsReport r;
  r.class_names = classes.names();
  r.iou = IouPerClass(cm);
  if (std::any_of(r.iou.begin(), r.iou.end(),
                  [](const auto& v) { return v.has_value(); })) {
    r.miou = MeanIou(cm);
  }
  r.evaluated_pixels = cm.total();
  r.unassigned_pixels = cm.unassigned_total();
  for (std::size_t c = 0; c < cm.size(); ++c) {
    r.truth_pixels.push_back(cm.row_sum(c));
    r.predicted_pixels.push_back(cm.col_sum(c));
  }
  return r;
}

std::string ReportToJson(const MetricsReport& report) {
  nlohmann::json j;
  j["classes"] = nlohmann::json::array();
  for (std::size_t c = 0; c < report.class_names.size(); ++c) {
    nlohmann::json e;
    e["name"] = report.class_names[c];
    e["iou"] = report.iou[c] ? nlohmann::json(*report.iou[c]) : nlohmann::json(nullptr);
    e["truth_pixels"] = report.truth_pixels[c];
    e["predicted_pixels"] = report.predicted_pixels[c];
    j["classes"].push_back(std::move(e));
  }
  j["miou"] = report.miou ? nlohmann::json(*report.miou) : nlohmann::json(nullptr);
  j["evaluated_pixels"] = report.evaluated_pixels;
  j["unassigned_pixels"] = report.unassigned_pixels;
  return j.dump(2) + "\n";
}

std::string ReportToText(const MetricsReport& report) {
  std::size_t name_width = 5;
  for (const auto& n : report.class_names) {
    name_width = std::max(name_width, n.size());
  }
  std::string out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-*s %8s %14s %14s\n",
                static_cast<int>(name_width), "class", "IoU", "truth_px",
                "pred_px");
  out += line;
  for (std::size_t c = 0; c < report.class_names.size(); ++c) {
    char iou[32];
    if (report.iou[c]) {
      std::snprintf(iou, sizeof(iou), "%.4f", *report.iou[c]);
    } else {
      std::snprintf(iou, sizeof(iou), "-");
    }
    std::snprintf(line, sizeof(line), "%-*s %8s %14llu %14llu\n",
                  static_cast<int>(name_width),
                  report.class_names[c].c_str(), iou,
                  static_cast<unsigned long long>(report.truth_pixels[c]),
                  static_cast<unsigned long long>(report.predicted_pixels[c]));
    out += line;
  }
  if (report.miou) {
    std::snprintf(line, sizeof(line), "%-*s %8.4f\n",
                  static_cast<int>(name_width), "mIoU", *report.miou);
  } else {
    std::snprintf(line, sizeof(line), "%-*s %8s\n",
                  static_cast<int>(name_width), "mIoU", "-");
  }
  out += line;
  std::snprintf(line, sizeof(line), "evaluated %llu px, unassigned %llu px\n",
                static_cast<unsigned long long>(report.evaluated_pixels),
                static_cast<unsigned long long>(report.unassigned_pixels));
  out += line;
  return out;
}

}  // namespace segfuse
