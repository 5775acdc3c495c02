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

#include "segfuse/class_table.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "byte_io.hpp"
#include "segfuse/error.hpp"
#include "segfuse/label_map.hpp"

namespace segfuse {

ClassTable::ClassTable(std::vector<std::string> names,
                       std::optional<std::uint16_t> background_index)
    : names_(std::move(names)), background_(background_index) {
  if (names_.empty()) throw ValidationError("classes: empty class table");
  if (names_.size() >= kIgnoreIndex) {
    throw ValidationError("classes: at most 65535 entries");
  }
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!internal::IsValidUtf8(names_[i])) {
      throw ValidationError("classes[" + std::to_string(i) +
                            "]: invalid UTF-8");
    }
    if (!seen.insert(names_[i]).second) {
      throw ValidationError("classes[" + std::to_string(i) +
                            "]: duplicate name '" + names_[i] + "'");
    }
  }
  if (background_ && *background_ >= names_.size()) {
    throw ValidationError("background_index: " + std::to_string(*background_) +
                          " is not a valid entry");
  }
}

std::optional<std::uint16_t> ClassTable::Find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<std::uint16_t>(i);
  }
  return std::nullopt;
}

std::vector<std::uint16_t> ClassTable::ScoredIndices() const {
  std::vector<std::uint16_t> out;
  out.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!is_background(static_cast<std::uint16_t>(i))) {
      out.push_back(static_cast<std::uint16_t>(i));
    }
  }
  return out;
}

ClassTable ParseClassTable(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("class table: ") + e.what());
  }
  if (!j.is_object() || !j.contains("classes") || !j["classes"].is_array()) {
    throw FormatError("class table: expected an object with a \"classes\" "
                      "array");
  }
  std::vector<std::string> names;
  for (const auto& entry : j["classes"]) {
    if (!entry.is_string()) {
      throw FormatError("class table: class names must be strings");
    }
    names.push_back(entry.get<std::string>());
  }
  std::optional<std::uint16_t> background;
  if (j.contains("background_index") && !j["background_index"].is_null()) {
    const auto& b = j["background_index"];
    if (!b.is_number_integer() || b.get<std::int64_t>() < 0 ||
        b.get<std::int64_t>() >= static_cast<std::int64_t>(names.size())) {
      throw ValidationError("background_index: not a valid entry");
    }
    background = static_cast<std::uint16_t>(b.get<std::int64_t>());
  }
  return ClassTable(std::move(names), background);
}

std::string ClassTableToJson(const ClassTable& table) {
  nlohmann::json j;
  j["classes"] = table.names();
  if (table.background_index()) {
    j["background_index"] = *table.background_index();
  } else {
    j["background_index"] = nullptr;
  }
  return j.dump(2) + "\n";
}

ClassTable ReadClassTableFile(const std::filesystem::path& path) {
  return ParseClassTable(internal::ReadFileText(path));
}

void WriteClassTableFile(const ClassTable& table,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << ClassTableToJson(table);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace segfuse
