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

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "segfuse/error.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/oracle.hpp"
#include "segfuse/synth.hpp"
#include "segfuse/tiler.hpp"
#include "test_util.hpp"

namespace segfuse {
namespace {

using ::segfuse::testing::RandomLabels;
using ::segfuse::testing::RandomMap;
using ::segfuse::testing::TempDir;

std::vector<std::uint32_t> Coverage(const TileGrid& grid) {
  std::vector<std::uint32_t> hits(
      std::size_t{grid.image_height} * grid.image_width, 0);
  for (const BBox& b : grid.tiles) {
    for (std::uint32_t y = b.y0; y < b.y1; ++y) {
      for (std::uint32_t x = b.x0; x < b.x1; ++x) {
        ++hits[std::size_t{y} * grid.image_width + x];
      }
    }
  }
  return hits;
}

std::set<std::uint32_t> RowStarts(const TileGrid& grid) {
  std::set<std::uint32_t> s;
  for (const BBox& b : grid.tiles) s.insert(b.y0);
  return s;
}

TEST(PlanTilesTest, ExactTileIsOneWindow) {
  const TileGrid g = PlanTiles(1008, 1008);
  ASSERT_EQ(g.tiles.size(), 1u);
  EXPECT_EQ(g.tiles[0].area(), 1008u * 1008u);
}

TEST(PlanTilesTest, DoubleWidthIsTwoWindows) {
  const TileGrid g = PlanTiles(1008, 2016);
  ASSERT_EQ(g.tiles.size(), 2u);
  EXPECT_EQ(g.tiles[0].x0, 0u);
  EXPECT_EQ(g.tiles[1].x0, 1008u);
}

TEST(PlanTilesTest, ImageSmallerThanTileIsSingleTruncatedWindow) {
  const TileGrid g = PlanTiles(300, 500);
  ASSERT_EQ(g.tiles.size(), 1u);
  EXPECT_EQ(g.tiles[0].height(), 300u);
  EXPECT_EQ(g.tiles[0].width(), 500u);
}

TEST(PlanTilesTest, OverlapShiftsLastWindowInward) {
  const TileGrid g = PlanTiles(2500, 2500, 1008, 104);
  EXPECT_EQ(g.tiles.size(), 9u);
  EXPECT_EQ(RowStarts(g), (std::set<std::uint32_t>{0, 904, 1492}));
  for (const BBox& b : g.tiles) {
    EXPECT_EQ(b.height(), 1008u);
    EXPECT_EQ(b.width(), 1008u);
  }
  const auto hits = Coverage(g);
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(),
                          [](std::uint32_t h) { return h >= 1; }));
}

TEST(PlanTilesTest, DisjointGridCoversEveryPixelExactlyOnce) {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint32_t h = rng.Range(1, 300), w = rng.Range(1, 300);
    const std::uint32_t t = rng.Range(1, 120);
    const TileGrid g = PlanTiles(h, w, t, 0);
    const auto hits = Coverage(g);
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(),
                            [](std::uint32_t c) { return c == 1; }))
        << h << "x" << w << " tile " << t;
  }
}

TEST(PlanTilesTest, OverlappingGridCoversEveryPixel) {
  SplitMix64 rng(78);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint32_t h = rng.Range(1, 300), w = rng.Range(1, 300);
    const std::uint32_t t = rng.Range(2, 120);
    const std::uint32_t o = rng.Below(t);
    const TileGrid g = PlanTiles(h, w, t, o);
    const auto hits = Coverage(g);
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(),
                            [](std::uint32_t c) { return c >= 1; }));
    for (const BBox& b : g.tiles) {
      EXPECT_LE(b.x1, w);
      EXPECT_LE(b.y1, h);
      EXPECT_EQ(b.height(), std::min(t, h));
      EXPECT_EQ(b.width(), std::min(t, w));
    }
  }
}

TEST(PlanTilesTest, RejectsDegenerateParameters) {
  EXPECT_THROW(PlanTiles(0, 10), ValidationError);
  EXPECT_THROW(PlanTiles(10, 10, 0), ValidationError);
  EXPECT_THROW(PlanTiles(10, 10, 8, 8), ValidationError);
}

TEST(StitchLabelsTest, DisjointTilesReassembleImage) {
  SplitMix64 rng(5);
  const LabelMap whole = RandomLabels(rng, 37, 53, 7);
  const TileGrid g = PlanTiles(37, 53, 16, 0);
  std::vector<LabelMap> tiles;
  for (const BBox& b : g.tiles) {
    LabelMap t(b.height(), b.width());
    for (std::uint32_t y = 0; y < b.height(); ++y) {
      for (std::uint32_t x = 0; x < b.width(); ++x) {
        t.at(y, x) = whole.at(b.y0 + y, b.x0 + x);
      }
    }
    tiles.push_back(std::move(t));
  }
  EXPECT_EQ(StitchLabels(g, tiles), whole);

  // Insertion order does not matter.
  LabelStitcher s(g);
  for (std::size_t i = tiles.size(); i-- > 0;) s.Add(i, tiles[i]);
  EXPECT_EQ(std::move(s).Finish(), whole);
}

TEST(StitchLabelsTest, OverlappingGridIsRejected) {
  const TileGrid g = PlanTiles(20, 20, 16, 4);
  EXPECT_THROW(LabelStitcher{g}, UsageError);
}

TEST(StitchLabelsTest, MisuseIsReported) {
  const TileGrid g = PlanTiles(20, 20, 10, 0);
  LabelStitcher s(g);
  s.Add(0, LabelMap(10, 10));
  EXPECT_THROW(s.Add(0, LabelMap(10, 10)), UsageError);
  EXPECT_THROW(s.Add(1, LabelMap(9, 10)), ValidationError);
  EXPECT_THROW(s.Add(99, LabelMap(10, 10)), ValidationError);
  EXPECT_THROW(std::move(s).Finish(), UsageError);
}

// Every pixel's stitched value equals the maximum over all windows covering
// it, regardless of the order in which tiles arrive.
TEST(StitchProbsTest, Seed13CanvasIsPerPixelMaxOverCoveringWindows) {
  SplitMix64 rng(13);
  const TileGrid g = PlanTiles(2500, 1008, 1008, 104);
  ASSERT_EQ(g.tiles.size(), 3u);
  const std::size_t categories = 2;
  std::vector<std::vector<ProbMap>> per_tile;
  for (const BBox& b : g.tiles) {
    std::vector<ProbMap> maps;
    for (std::size_t c = 0; c < categories; ++c) {
      maps.push_back(RandomMap(rng, b.height(), b.width()));
    }
    per_tile.push_back(std::move(maps));
  }
  const auto stitched = StitchProbs(g, per_tile);
  ASSERT_EQ(stitched.size(), categories);
  for (std::size_t c = 0; c < categories; ++c) {
    for (std::uint32_t y = 0; y < 2500; y += 7) {
      for (std::uint32_t x = 0; x < 1008; x += 5) {
        float expected = 0.0f;
        for (std::size_t t = 0; t < g.tiles.size(); ++t) {
          const BBox& b = g.tiles[t];
          if (y >= b.y0 && y < b.y1 && x >= b.x0 && x < b.x1) {
            expected = std::max(expected, per_tile[t][c].at(y - b.y0, x - b.x0));
          }
        }
        ASSERT_EQ(stitched[c].at(y, x), expected) << c << " " << y << " " << x;
      }
    }
  }

  ProbStitcher reversed(g, categories);
  for (std::size_t t = g.tiles.size(); t-- > 0;) reversed.Add(t, per_tile[t]);
  const auto again = std::move(reversed).Finish();
  for (std::size_t c = 0; c < categories; ++c) {
    EXPECT_TRUE(again[c].BitEqual(stitched[c]));
  }
}

TEST(StitchProbsTest, CategoryCountMismatchIsRejected) {
  const TileGrid g = PlanTiles(8, 8, 8, 0);
  ProbStitcher s(g, 2);
  EXPECT_THROW(s.Add(0, std::vector<ProbMap>{ProbMap(8, 8)}), ValidationError);
}

TEST(RunTiledTest, DisjointAndOverlappingMatchWholeImage) {
  SplitMix64 rng(31);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const RandomCase rc = MakeRandomCase(seed, {48, 48, 5, 2, 4});
    const LabelMap whole = RunPipeline(rc.bundle, rc.classes, rc.config);
    const std::uint32_t tile = rng.Range(4, 20);
    EXPECT_EQ(RunTiled(rc.bundle, tile, 0, rc.classes, rc.config), whole)
        << "seed " << seed;
    const std::uint32_t overlap = rng.Below(tile);
    EXPECT_EQ(RunTiled(rc.bundle, tile, overlap, rc.classes, rc.config), whole)
        << "seed " << seed << " overlap " << overlap;
  }
}

TEST(RunTiledTest, WrongTileShapeIsRejected) {
  const RandomCase rc = MakeRandomCase(3, {16, 16, 3, 1, 2});
  const TileGrid g = PlanTiles(rc.bundle.height, rc.bundle.width, 8, 0);
  EXPECT_THROW(RunTiled(
                   g, [&](std::size_t) { return rc.bundle; }, rc.classes,
                   rc.config),
               ValidationError);
}

TEST(TileManifestTest, RoundTripsAndRunsFromDisk) {
  TempDir dir;
  const RandomCase rc = MakeRandomCase(8, {40, 40, 4, 2, 3});
  TileManifest m;
  m.image_id = rc.bundle.image_id;
  m.grid = PlanTiles(rc.bundle.height, rc.bundle.width, 12, 3);
  for (std::size_t t = 0; t < m.grid.tiles.size(); ++t) {
    const std::string name = "tile_" + std::to_string(t) + ".sov3";
    WriteBundleFile(CropBundle(rc.bundle, m.grid.tiles[t]), dir / name);
    m.bundles.push_back(name);
  }
  WriteTileManifestFile(m, dir / "manifest.json");
  const TileManifest back = ReadTileManifestFile(dir / "manifest.json");
  EXPECT_EQ(back.image_id, m.image_id);
  EXPECT_EQ(back.grid.overlap, 3u);
  ASSERT_EQ(back.grid.tiles.size(), m.grid.tiles.size());
  EXPECT_EQ(back.bundles[0], dir.path() / "tile_0.sov3");
  EXPECT_EQ(RunManifest(back, rc.classes, rc.config),
            ReferencePipeline(rc.bundle, rc.classes, rc.config));
}

TEST(TileManifestTest, MalformedManifestsAreRejected) {
  EXPECT_THROW(ParseTileManifest("{"), FormatError);
  EXPECT_THROW(ParseTileManifest(R"({"height": 4})"), FormatError);
  EXPECT_THROW(ParseTileManifest(
                   R"({"height": 4, "width": 4, "tiles": []})"),
               ValidationError);
  // Window does not cover the image.
  EXPECT_THROW(
      ParseTileManifest(R"({"height": 4, "width": 4, "tile_size": 4,
        "tiles": [{"x0":0,"y0":0,"x1":4,"y1":2,"bundle":"a"}]})"),
      ValidationError);
}

}  // namespace
}  // namespace segfuse
