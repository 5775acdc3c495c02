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

#include "render.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "segfuse/error.hpp"

namespace segfuse::tools {

const std::array<Rgb, 256>& DefaultPalette() {
  static const std::array<Rgb, 256> palette = [] {
    std::array<Rgb, 256> p{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i + 1;
      std::uint8_t r = 0, g = 0, b = 0;
      for (int j = 7; j >= 0; --j) {
        r |= static_cast<std::uint8_t>(((c >> 0) & 1) << j);
        g |= static_cast<std::uint8_t>(((c >> 1) & 1) << j);
        b |= static_cast<std::uint8_t>(((c >> 2) & 1) << j);
        c >>= 3;
      }
      p[i] = Rgb{r, g, b};
    }
    return p;
  }();
  return palette;
}

Palette ResolvePalette(const ClassTable& classes,
                       std::optional<std::string_view> palette_json,
                       std::vector<std::string>* warnings) {
  Palette out;
  out.colors.resize(classes.size());
  const auto& defaults = DefaultPalette();
  std::vector<bool> assigned(classes.size(), false);
  for (std::size_t i = 0; i < classes.size() && i < defaults.size(); ++i) {
    out.colors[i] = defaults[i];
    assigned[i] = true;
  }
  auto warn = [&](std::string w) {
    if (warnings != nullptr) warnings->push_back(std::move(w));
  };

  if (palette_json) {
    const bool blank = std::all_of(
        palette_json->begin(), palette_json->end(),
        [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
    nlohmann::json j;
    if (!blank) {
      try {
        j = nlohmann::json::parse(*palette_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("palette: ") + e.what());
      }
      if (!j.is_object()) throw FormatError("palette: expected an object");
    }
    if (blank || j.empty()) {
      warn("palette file is empty; using the default palette");
    } else {
      for (const auto& [name, rgb] : j.items()) {
        const auto index = classes.Find(name);
        if (!index) {
          throw ValidationError("palette: unknown class '" + name + "'");
        }
        if (!rgb.is_array() || rgb.size() != 3 ||
            !std::all_of(rgb.begin(), rgb.end(), [](const auto& v) {
              return v.is_number_integer() && v.template get<int>() >= 0 &&
                     v.template get<int>() <= 255;
            })) {
          throw ValidationError("palette: '" + name +
                                "' must be [r, g, b] with 0..255 entries");
        }
        out.colors[*index] = Rgb{rgb[0].get<std::uint8_t>(),
                                 rgb[1].get<std::uint8_t>(),
                                 rgb[2].get<std::uint8_t>()};
        assigned[*index] = true;
      }
    }
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!assigned[i]) {
      throw ValidationError("palette: class '" + classes.name(
                                static_cast<std::uint16_t>(i)) +
                            "' (index >= 256) has no colour");
    }
  }
  std::set<std::tuple<int, int, int>> seen;
  for (const Rgb& c : out.colors) {
    if (!seen.insert({c.r, c.g, c.b}).second) {
      warn("palette: two classes share a colour; rendering is not decodable");
      break;
    }
  }
  return out;
}

Image RenderLabels(const LabelMap& labels, const Palette& palette,
                   IgnoreStyle ignore) {
  Image img;
  img.height = labels.height();
  img.width = labels.width();
  img.channels = ignore == IgnoreStyle::kTransparent ? 4 : 3;
  img.pixels.resize(labels.size() * img.channels);
  std::uint8_t* dst = img.pixels.data();
  for (std::uint16_t label : labels.labels()) {
    Rgb c{};
    std::uint8_t alpha = 255;
    if (label == kIgnoreIndex) {
      alpha = 0;
    } else if (label < palette.colors.size()) {
      c = palette.colors[label];
    } else {
      throw ValidationError("render: label " + std::to_string(label) +
                            " has no palette entry");
    }
    dst[0] = c.r;
    dst[1] = c.g;
    dst[2] = c.b;
    if (img.channels == 4) dst[3] = alpha;
    dst += img.channels;
  }
  return img;
}

void WritePng(const Image& image, const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = image.width;
  png.height = image.height;
  png.format = image.channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0,
                               image.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot write " + path.string() + ": " + msg);
  }
}

Image ReadPng(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw IoError("cannot read " + path.string() + ": " + png.message);
  }
  Image img;
  img.height = png.height;
  img.width = png.width;
  img.channels = (png.format & PNG_FORMAT_FLAG_ALPHA) ? 4 : 3;
  png.format = img.channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  img.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot decode " + path.string() + ": " + msg);
  }
  return img;
}

}  // namespace segfuse::tools
