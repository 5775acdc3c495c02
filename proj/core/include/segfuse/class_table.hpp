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

#ifndef SEGFUSE_CLASS_TABLE_HPP_
#define SEGFUSE_CLASS_TABLE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace segfuse {

// Ordered vocabulary. Entry i has index i. At most one entry may be the
// background class; it receives pixels whose best score falls below tau and
// never has a probability map of its own.
class ClassTable {
 public:
  ClassTable() = default;
  ClassTable(std::vector<std::string> names,
             std::optional<std::uint16_t> background_index = std::nullopt);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint16_t index) const { return names_[index]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::uint16_t> background_index() const {
    return background_;
  }
  bool is_background(std::uint16_t index) const {
    return background_ && *background_ == index;
  }
  std::optional<std::uint16_t> Find(std::string_view name) const;

  // Class indices that carry probability maps, ascending.
  std::vector<std::uint16_t> ScoredIndices() const;

  friend bool operator==(const ClassTable&, const ClassTable&) = default;

 private:
  std::vector<std::string> names_;
  std::optional<std::uint16_t> background_;
};

// {"classes": ["name", ...], "background_index": int | null}
ClassTable ParseClassTable(std::string_view json_text);
std::string ClassTableToJson(const ClassTable& table);
ClassTable ReadClassTableFile(const std::filesystem::path& path);
void WriteClassTableFile(const ClassTable& table,
                         const std::filesystem::path& path);

}  // namespace segfuse

#endif  // SEGFUSE_CLASS_TABLE_HPP_
