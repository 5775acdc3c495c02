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

#ifndef SEGFUSE_TILER_HPP_
#define SEGFUSE_TILER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segfuse/bundle.hpp"
#include "segfuse/class_table.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/label_map.hpp"
#include "segfuse/prob_map.hpp"

namespace segfuse {

inline constexpr std::uint32_t kDefaultTileSize = 1008;

struct TileGrid {
  std::uint32_t image_height = 0;
  std::uint32_t image_width = 0;
  std::uint32_t tile_size = kDefaultTileSize;
  std::uint32_t overlap = 0;
  // Row-major windows.
  std::vector<BBox> tiles;

  bool disjoint() const { return overlap == 0; }
};

// Windows start at multiples of (tile_size - overlap) along each axis.
// With overlap 0 the final window on an axis is truncated at the image edge
// so windows partition the image. With overlap > 0 the final window is
// shifted inward to keep its full size (or the image size, if smaller).
TileGrid PlanTiles(std::uint32_t image_height, std::uint32_t image_width,
                   std::uint32_t tile_size = kDefaultTileSize,
                   std::uint32_t overlap = 0);

// Copies per-tile label maps into a full canvas. Disjoint grids only.
class LabelStitcher {
 public:
  explicit LabelStitcher(const TileGrid& grid);
  // Tiles may arrive in any order; each index at most once.
  void Add(std::size_t tile_index, const LabelMap& tile);
  // Throws UsageError unless every tile was added.
  LabelMap Finish() &&;

 private:
  TileGrid grid_;
  LabelMap canvas_;
  std::vector<bool> seen_;
};

// Per-category max canvas over possibly overlapping tiles.
class ProbStitcher {
 public:
  ProbStitcher(const TileGrid& grid, std::size_t category_count);
  void Add(std::size_t tile_index, std::span<const ProbMap> tile_maps);
  std::vector<ProbMap> Finish() &&;

 private:
  TileGrid grid_;
  std::vector<ProbMap> canvas_;
  std::vector<bool> seen_;
};

LabelMap StitchLabels(const TileGrid& grid, std::span<const LabelMap> tiles);

// per_tile[t][c] is category c's map for window t.
std::vector<ProbMap> StitchProbs(
    const TileGrid& grid, std::span<const std::vector<ProbMap>> per_tile);

// Supplies the bundle for window `tile_index`; the returned bundle must have
// the window's dimensions.
using TileSource = std::function<HeadBundle(std::size_t tile_index)>;

// Runs the pipeline per window and stitches. Disjoint grids stitch labels;
// overlapping grids stitch category maps by max and label afterwards.
// Tiles are processed one at a time.
LabelMap RunTiled(const TileGrid& grid, const TileSource& source,
                  const ClassTable& classes, const FusionConfig& config,
                  const ExecutionOptions& exec = {});

// Tiles an in-memory bundle with CropBundle.
LabelMap RunTiled(const HeadBundle& bundle, std::uint32_t tile_size,
                  std::uint32_t overlap, const ClassTable& classes,
                  const FusionConfig& config,
                  const ExecutionOptions& exec = {});

// JSON listing of windows and the bundle file for each:
// {"image_id": s, "height": n, "width": n, "tile_size": n, "overlap": n,
//  "tiles": [{"x0": n, "y0": n, "x1": n, "y1": n, "bundle": "path"}, ...]}
// Relative bundle paths resolve against the manifest's directory.
struct TileManifest {
  std::string image_id;
  TileGrid grid;
  std::vector<std::filesystem::path> bundles;
};

TileManifest ParseTileManifest(std::string_view json_text,
                               const std::filesystem::path& base_dir = {});
std::string TileManifestToJson(const TileManifest& manifest);
TileManifest ReadTileManifestFile(const std::filesystem::path& path);
void WriteTileManifestFile(const TileManifest& manifest,
                           const std::filesystem::path& path);

LabelMap RunManifest(const TileManifest& manifest, const ClassTable& classes,
                     const FusionConfig& config,
                     const ExecutionOptions& exec = {});

}  // namespace segfuse

#endif  // SEGFUSE_TILER_HPP_
