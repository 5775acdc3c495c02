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

#include "segfuse/tiler.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "byte_io.hpp"
#include "segfuse/error.hpp"

namespace segfuse {
namespace {

using Span1D = std::pair<std::uint32_t, std::uint32_t>;

std::vector<Span1D> PlanAxis(std::uint32_t extent, std::uint32_t tile,
                             std::uint32_t overlap) {
  std::vector<Span1D> out;
  if (overlap == 0) {
    for (std::uint64_t s = 0; s < extent; s += tile) {
      out.emplace_back(static_cast<std::uint32_t>(s),
                       static_cast<std::uint32_t>(
                           std::min<std::uint64_t>(s + tile, extent)));
    }
    return out;
  }
  if (extent <= tile) {
    out.emplace_back(0, extent);
    return out;
  }
  const std::uint64_t stride = tile - overlap;
  for (std::uint64_t s = 0;; s += stride) {
    if (s + tile >= extent) {
      out.emplace_back(extent - tile, extent);
      break;
    }
    out.emplace_back(static_cast<std::uint32_t>(s),
                     static_cast<std::uint32_t>(s + tile));
  }
  return out;
}

std::string WindowText(const BBox& b) {
  return "(" + std::to_string(b.x0) + "," + std::to_string(b.y0) + "," +
         std::to_string(b.x1) + "," + std::to_string(b.y1) + ")";
}

void CheckTileIndex(const TileGrid& grid, std::size_t index,
                    std::vector<bool>& seen) {
  if (index >= grid.tiles.size()) {
    throw ValidationError("tile index " + std::to_string(index) +
                          " out of range for " +
                          std::to_string(grid.tiles.size()) + " windows");
  }
  if (seen[index]) {
    throw UsageError("tile " + std::to_string(index) + " added twice");
  }
}

// Every pixel covered; exactly once when the grid claims to be disjoint.
void CheckGrid(const TileGrid& grid) {
  if (grid.image_height == 0 || grid.image_width == 0) {
    throw ValidationError("tile grid: image dimensions must be >= 1");
  }
  if (grid.tile_size == 0 || grid.overlap >= grid.tile_size) {
    throw ValidationError("tile grid: require tile_size >= 1 and "
                          "overlap < tile_size");
  }
  std::vector<bool> covered(
      static_cast<std::size_t>(grid.image_height) * grid.image_width, false);
  for (const BBox& b : grid.tiles) {
    if (b.x0 >= b.x1 || b.y0 >= b.y1 || b.x1 > grid.image_width ||
        b.y1 > grid.image_height || b.width() > grid.tile_size ||
        b.height() > grid.tile_size) {
      throw ValidationError("tile grid: invalid window " + WindowText(b));
    }
    for (std::uint32_t y = b.y0; y < b.y1; ++y) {
      const std::size_t base = static_cast<std::size_t>(y) * grid.image_width;
      for (std::uint32_t x = b.x0; x < b.x1; ++x) {
        if (covered[base + x] && grid.disjoint()) {
          throw ValidationError("tile grid: window " + WindowText(b) +
                                " overlaps another window with overlap 0");
        }
        covered[base + x] = true;
      }
    }
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw ValidationError("tile grid: windows do not cover the image");
  }
}

}  // namespace

TileGrid PlanTiles(std::uint32_t image_height, std::uint32_t image_width,
                   std::uint32_t tile_size, std::uint32_t overlap) {
  if (image_height == 0 || image_width == 0) {
    throw ValidationError("plan_tiles: image dimensions must be >= 1");
  }
  if (tile_size == 0) throw ValidationError("plan_tiles: tile_size must be >= 1");
  if (overlap >= tile_size) {
    throw ValidationError("plan_tiles: overlap must be < tile_size");
  }
  TileGrid grid{image_height, image_width, tile_size, overlap, {}};
  const auto rows = PlanAxis(image_height, tile_size, overlap);
  const auto cols = PlanAxis(image_width, tile_size, overlap);
  grid.tiles.reserve(rows.size() * cols.size());
  for (const auto& [y0, y1] : rows) {
    for (const auto& [x0, x1] : cols) grid.tiles.push_back(BBox{x0, y0, x1, y1});
  }
  return grid;
}

LabelStitcher::LabelStitcher(const TileGrid& grid)
    : grid_(grid), seen_(grid.tiles.size(), false) {
  if (!grid.disjoint()) {
    throw UsageError("stitch_labels: overlap " + std::to_string(grid.overlap) +
                     " > 0; overlapping tiles must be stitched with "
                     "stitch_probs");
  }
  canvas_ = LabelMap(grid.image_height, grid.image_width, kIgnoreIndex);
}

void LabelStitcher::Add(std::size_t tile_index, const LabelMap& tile) {
  CheckTileIndex(grid_, tile_index, seen_);
  const BBox& w = grid_.tiles[tile_index];
  if (tile.height() != w.height() || tile.width() != w.width()) {
    throw ValidationError("stitch_labels: tile " + std::to_string(tile_index) +
                          " is " + std::to_string(tile.height()) + "x" +
                          std::to_string(tile.width()) + ", window " +
                          WindowText(w) + " needs " +
                          std::to_string(w.height()) + "x" +
                          std::to_string(w.width()));
  }
  for (std::uint32_t y = 0; y < w.height(); ++y) {
    auto src = tile.row(y);
    std::copy(src.begin(), src.end(),
              canvas_.row(w.y0 + y).begin() + w.x0);
  }
  seen_[tile_index] = true;
}

LabelMap LabelStitcher::Finish() && {
  if (std::find(seen_.begin(), seen_.end(), false) != seen_.end()) {
    throw UsageError("stitch_labels: not every tile was added");
  }
  return std::move(canvas_);
}

ProbStitcher::ProbStitcher(const TileGrid& grid, std::size_t category_count)
    : grid_(grid), seen_(grid.tiles.size(), false) {
  if (category_count == 0) {
    throw ValidationError("stitch_probs: at least one category required");
  }
  canvas_.reserve(category_count);
  for (std::size_t c = 0; c < category_count; ++c) {
    canvas_.emplace_back(grid.image_height, grid.image_width);
  }
}

void ProbStitcher::Add(std::size_t tile_index,
                       std::span<const ProbMap> tile_maps) {
  CheckTileIndex(grid_, tile_index, seen_);
  const BBox& w = grid_.tiles[tile_index];
  if (tile_maps.size() != canvas_.size()) {
    throw ValidationError("stitch_probs: tile " + std::to_string(tile_index) +
                          " has " + std::to_string(tile_maps.size()) +
                          " category maps, expected " +
                          std::to_string(canvas_.size()));
  }
  for (const auto& m : tile_maps) {
    if (m.height() != w.height() || m.width() != w.width()) {
      throw ValidationError("stitch_probs: tile " +
                            std::to_string(tile_index) +
                            " map does not match window " + WindowText(w));
    }
  }
  for (std::size_t c = 0; c < canvas_.size(); ++c) {
    for (std::uint32_t y = 0; y < w.height(); ++y) {
      auto src = tile_maps[c].row(y);
      float* dst = canvas_[c].row(w.y0 + y).data() + w.x0;
      for (std::uint32_t x = 0; x < w.width(); ++x) {
        dst[x] = src[x] > dst[x] ? src[x] : dst[x];
      }
    }
  }
  seen_[tile_index] = true;
}

std::vector<ProbMap> ProbStitcher::Finish() && {
  if (std::find(seen_.begin(), seen_.end(), false) != seen_.end()) {
    throw UsageError("stitch_probs: not every tile was added");
  }
  return std::move(canvas_);
}

LabelMap StitchLabels(const TileGrid& grid, std::span<const LabelMap> tiles) {
  LabelStitcher stitcher(grid);
  if (tiles.size() != grid.tiles.size()) {
    throw ValidationError("stitch_labels: " + std::to_string(tiles.size()) +
                          " tiles for " + std::to_string(grid.tiles.size()) +
                          " windows");
  }
  for (std::size_t t = 0; t < tiles.size(); ++t) stitcher.Add(t, tiles[t]);
  return std::move(stitcher).Finish();
}

std::vector<ProbMap> StitchProbs(
    const TileGrid& grid, std::span<const std::vector<ProbMap>> per_tile) {
  if (per_tile.size() != grid.tiles.size() || per_tile.empty()) {
    throw ValidationError("stitch_probs: " + std::to_string(per_tile.size()) +
                          " tiles for " + std::to_string(grid.tiles.size()) +
                          " windows");
  }
  ProbStitcher stitcher(grid, per_tile.front().size());
  for (std::size_t t = 0; t < per_tile.size(); ++t) {
    stitcher.Add(t, per_tile[t]);
  }
  return std::move(stitcher).Finish();
}

LabelMap RunTiled(const TileGrid& grid, const TileSource& source,
                  const ClassTable& classes, const FusionConfig& config,
                  const ExecutionOptions& exec) {
  CheckGrid(grid);
  auto fetch = [&](std::size_t t) {
    HeadBundle bundle = source(t);
    const BBox& w = grid.tiles[t];
    if (bundle.height != w.height() || bundle.width != w.width()) {
      throw ValidationError("tile " + std::to_string(t) + " bundle is " +
                            std::to_string(bundle.height) + "x" +
                            std::to_string(bundle.width) + ", window " +
                            WindowText(w) + " needs " +
                            std::to_string(w.height()) + "x" +
                            std::to_string(w.width()));
    }
    return bundle;
  };
  if (grid.disjoint()) {
    LabelStitcher stitcher(grid);
    for (std::size_t t = 0; t < grid.tiles.size(); ++t) {
      stitcher.Add(t, RunPipeline(fetch(t), classes, config, exec));
    }
    return std::move(stitcher).Finish();
  }
  ProbStitcher stitcher(grid, classes.ScoredIndices().size());
  for (std::size_t t = 0; t < grid.tiles.size(); ++t) {
    stitcher.Add(t, CategoryMaps(fetch(t), classes, config, exec));
  }
  const auto maps = std::move(stitcher).Finish();
  return LabelArgmax(maps, classes, config.tau, exec);
}

LabelMap RunTiled(const HeadBundle& bundle, std::uint32_t tile_size,
                  std::uint32_t overlap, const ClassTable& classes,
                  const FusionConfig& config, const ExecutionOptions& exec) {
  const TileGrid grid = PlanTiles(bundle.height, bundle.width, tile_size,
                                  overlap);
  if (grid.tiles.size() == 1) return RunPipeline(bundle, classes, config, exec);
  return RunTiled(
      grid, [&](std::size_t t) { return CropBundle(bundle, grid.tiles[t]); },
      classes, config, exec);
}

TileManifest ParseTileManifest(std::string_view json_text,
                               const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("tile manifest: ") + e.what());
  }
  TileManifest m;
  try {
    m.image_id = j.value("image_id", std::string());
    m.grid.image_height = j.at("height").get<std::uint32_t>();
    m.grid.image_width = j.at("width").get<std::uint32_t>();
    m.grid.tile_size = j.value("tile_size", kDefaultTileSize);
    m.grid.overlap = j.value("overlap", 0u);
    for (const auto& t : j.at("tiles")) {
      m.grid.tiles.push_back(BBox{t.at("x0").get<std::uint32_t>(),
                                  t.at("y0").get<std::uint32_t>(),
                                  t.at("x1").get<std::uint32_t>(),
                                  t.at("y1").get<std::uint32_t>()});
      std::filesystem::path p = t.at("bundle").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      m.bundles.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tile manifest: ") + e.what());
  }
  if (m.grid.tiles.empty()) throw ValidationError("tile manifest: no tiles");
  CheckGrid(m.grid);
  return m;
}

std::string TileManifestToJson(const TileManifest& manifest) {
  nlohmann::json j;
  j["image_id"] = manifest.image_id;
  j["height"] = manifest.grid.image_height;
  j["width"] = manifest.grid.image_width;
  j["tile_size"] = manifest.grid.tile_size;
  j["overlap"] = manifest.grid.overlap;
  j["tiles"] = nlohmann::json::array();
  for (std::size_t t = 0; t < manifest.grid.tiles.size(); ++t) {
    const BBox& b = manifest.grid.tiles[t];
    j["tiles"].push_back({{"x0", b.x0},
                          {"y0", b.y0},
                          {"x1", b.x1},
                          {"y1", b.y1},
                          {"bundle", manifest.bundles.at(t).generic_string()}});
  }
  return j.dump(2) + "\n";
}

TileManifest ReadTileManifestFile(const std::filesystem::path& path) {
  return ParseTileManifest(internal::ReadFileText(path), path.parent_path());
}

void WriteTileManifestFile(const TileManifest& manifest,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << TileManifestToJson(manifest);
  if (!out) throw IoError("write failed: " + path.string());
}

LabelMap RunManifest(const TileManifest& manifest, const ClassTable& classes,
                     const FusionConfig& config,
                     const ExecutionOptions& exec) {
  if (manifest.bundles.size() != manifest.grid.tiles.size()) {
    throw ValidationError("tile manifest: bundle count does not match windows");
  }
  return RunTiled(
      manifest.grid,
      [&](std::size_t t) { return ReadBundleFile(manifest.bundles[t]); },
      classes, config, exec);
}

}  // namespace segfuse
