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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "render.hpp"
#include "segfuse/bundle.hpp"
#include "segfuse/class_table.hpp"
#include "segfuse/error.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/label_map.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/synth.hpp"
#include "segfuse/tiler.hpp"

namespace segfuse::tools {
namespace {

namespace fs = std::filesystem;

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

bool HasBundleMagic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string_view(magic, 4) == "SOV3";
}

// "0-9", "3", "1,4,7-8".
std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    try {
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo || hi - lo > 1000000) throw std::invalid_argument(part);
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ValidationError("--seeds: cannot parse '" + part + "'");
    }
  }
  if (seeds.empty()) throw ValidationError("--seeds: no seeds given");
  return seeds;
}

struct FusionFlags {
  std::string config_path;
  std::optional<float> tau;
  std::optional<float> instance_conf_threshold;
  bool no_presence = false;

  void Register(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "JSON file with tau, instance_conf_threshold, "
                    "presence_gating");
    cmd->add_option("--tau", tau, "Background threshold");
    cmd->add_option("--instance-conf-threshold", instance_conf_threshold,
                    "Minimum decoder confidence");
    cmd->add_flag("--no-presence", no_presence, "Disable presence gating");
  }

  FusionConfig Resolve() const {
    FusionConfig config;
    if (!config_path.empty()) config = ParseFusionConfig(ReadText(config_path));
    if (tau) config.tau = *tau;
    if (instance_conf_threshold) {
      config.instance_conf_threshold = *instance_conf_threshold;
    }
    if (no_presence) config.presence_gating = false;
    config.Validate();
    return config;
  }
};

HeadSelection ParseHeads(const std::string& heads) {
  if (heads == "both") return HeadSelection::kBoth;
  if (heads == "instance") return HeadSelection::kInstanceOnly;
  if (heads == "semantic") return HeadSelection::kSemanticOnly;
  throw ValidationError("--heads: expected both, instance or semantic");
}

// fuse ---------------------------------------------------------------------

struct FuseArgs {
  std::string input;
  std::string classes;
  std::string output;
  FusionFlags fusion;
  std::uint32_t tile_size = 0;
  std::uint32_t overlap = 0;
  int threads = 1;
  std::string heads = "both";
};

void RunFuse(const FuseArgs& a, std::ostream& out) {
  const ClassTable classes = ReadClassTableFile(a.classes);
  const FusionConfig config = a.fusion.Resolve();
  if (a.threads < 1) throw ValidationError("--threads must be >= 1");
  const ExecutionOptions exec{a.threads};
  const HeadSelection heads = ParseHeads(a.heads);

  LabelMap labels;
  if (HasBundleMagic(a.input)) {
    HeadBundle bundle = ReadBundleFile(a.input);
    if (heads != HeadSelection::kBoth) bundle = SelectHeads(bundle, heads);
    if (a.tile_size > 0) {
      labels = RunTiled(bundle, a.tile_size, a.overlap, classes, config, exec);
    } else {
      if (a.overlap > 0) {
        throw UsageError("--overlap requires --tile-size");
      }
      labels = RunPipeline(bundle, classes, config, exec);
    }
  } else {
    const TileManifest manifest = ReadTileManifestFile(a.input);
    if (a.tile_size > 0 && (a.tile_size != manifest.grid.tile_size ||
                            a.overlap != manifest.grid.overlap)) {
      throw UsageError("--tile-size/--overlap disagree with the tile manifest");
    }
    if (heads != HeadSelection::kBoth) {
      labels = RunTiled(
          manifest.grid,
          [&](std::size_t t) {
            return SelectHeads(ReadBundleFile(manifest.bundles[t]), heads);
          },
          classes, config, exec);
    } else {
      labels = RunManifest(manifest, classes, config, exec);
    }
  }
  WriteLabelMapFile(labels, a.output);
  nlohmann::json j = {{"output", a.output},
                      {"height", labels.height()},
                      {"width", labels.width()},
                      {"digest", LabelMapDigest(labels)}};
  out << j.dump() << "\n";
}

// eval ---------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> pred;
  std::vector<std::string> truth;
  std::string classes;
  std::string foreground;
  std::string json_out;
};

void RunEval(const EvalArgs& a, std::ostream& out) {
  if (a.pred.size() != a.truth.size()) {
    throw ValidationError("--pred and --truth must be given the same number "
                          "of times");
  }
  const ClassTable classes = ReadClassTableFile(a.classes);
  ConfusionMatrix cm(classes.size());
  for (std::size_t i = 0; i < a.pred.size(); ++i) {
    const LabelMap pred = ReadLabelMapFile(a.pred[i]);
    const LabelMap truth = ReadLabelMapFile(a.truth[i]);
    ConfusionMatrix one(classes.size());
    one.Accumulate(pred, truth);
    cm += one;
  }
  const MetricsReport report = MakeReport(cm, classes);
  if (!a.json_out.empty()) WriteText(a.json_out, ReportToJson(report));
  if (!a.foreground.empty()) {
    const auto index = classes.Find(a.foreground);
    if (!index) {
      throw ValidationError("--foreground: unknown class '" + a.foreground +
                            "'");
    }
    const auto& iou = report.iou[*index];
    char line[64];
    if (iou) {
      std::snprintf(line, sizeof(line), "%.6f", *iou);
    } else {
      std::snprintf(line, sizeof(line), "undefined");
    }
    out << "IoU(" << a.foreground << ") = " << line << "\n";
    return;
  }
  out << ReportToText(report);
}

// render -------------------------------------------------------------------

struct RenderArgs {
  std::string labels;
  std::string classes;
  std::string output;
  std::string palette;
  std::string ignore = "transparent";
};

void RunRender(const RenderArgs& a, std::ostream& out, std::ostream& err) {
  const ClassTable classes = ReadClassTableFile(a.classes);
  const LabelMap labels = ReadLabelMapFile(a.labels);
  ValidateLabels(labels, classes);
  std::optional<std::string> palette_text;
  if (!a.palette.empty()) palette_text = ReadText(a.palette);
  std::vector<std::string> warnings;
  const Palette palette = ResolvePalette(
      classes,
      palette_text ? std::optional<std::string_view>(*palette_text)
                   : std::nullopt,
      &warnings);
  for (const auto& w : warnings) {
    err << nlohmann::json({{"warning", w}, {"command", "render"}}).dump()
        << "\n";
  }
  IgnoreStyle style;
  if (a.ignore == "transparent") {
    style = IgnoreStyle::kTransparent;
  } else if (a.ignore == "black") {
    style = IgnoreStyle::kBlack;
  } else {
    throw ValidationError("--ignore: expected transparent or black");
  }
  WritePng(RenderLabels(labels, palette, style), a.output);
  out << nlohmann::json({{"output", a.output},
                         {"height", labels.height()},
                         {"width", labels.width()}})
             .dump()
      << "\n";
}

// synth --------------------------------------------------------------------

struct SynthArgs {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> height;
  std::optional<std::uint32_t> width;
  std::optional<std::uint32_t> categories;
  std::optional<std::uint32_t> prompts;
  std::optional<std::uint32_t> max_instances;
  std::optional<float> stuff_fraction;
  std::optional<float> noise;
  std::optional<std::uint32_t> distractors;
  bool no_background = false;

  std::string output;
  std::string truth;
  std::string classes_out;
  std::string out_dir;
  std::uint32_t tile_size = 0;
  std::uint32_t overlap = 0;
  std::optional<std::uint64_t> ablation;
  bool things_only = false;
  std::string fixtures;
  std::string seeds = "0-9";
  FusionFlags fusion;
};

SynthSpec ResolveSpec(const SynthArgs& a) {
  SynthSpec spec;
  if (!a.spec_path.empty()) spec = ParseSynthSpec(ReadText(a.spec_path));
  if (a.seed) spec.seed = *a.seed;
  if (a.height) spec.height = *a.height;
  if (a.width) spec.width = *a.width;
  if (a.categories) spec.category_count = *a.categories;
  if (a.prompts) spec.prompts_per_category = *a.prompts;
  if (a.max_instances) spec.max_instances = *a.max_instances;
  if (a.stuff_fraction) spec.stuff_fraction = *a.stuff_fraction;
  if (a.noise) spec.noise_level = *a.noise;
  if (a.distractors) spec.distractor_count = *a.distractors;
  if (a.no_background) spec.with_background = false;
  spec.Validate();
  return spec;
}

void RunSynth(const SynthArgs& a, std::ostream& out) {
  if (a.ablation) {
    if (a.out_dir.empty()) throw UsageError("--ablation requires --out-dir");
    const fs::path dir = a.out_dir;
    fs::create_directories(dir);
    const AblationScene scene = MakeAblationScene(*a.ablation, !a.things_only);
    WriteBundleFile(scene.full, dir / "full.sov3");
    WriteBundleFile(scene.instance_only, dir / "instance_only.sov3");
    WriteBundleFile(scene.semantic_only, dir / "semantic_only.sov3");
    WriteLabelMapFile(scene.truth, dir / "truth.lbl");
    WriteClassTableFile(scene.classes, dir / "classes.json");
    WriteText(dir / "config.json",
              nlohmann::json({{"tau", scene.config.tau},
                              {"instance_conf_threshold",
                               scene.config.instance_conf_threshold},
                              {"presence_gating",
                               scene.config.presence_gating}})
                      .dump(2) +
                  "\n");
    out << nlohmann::json({{"out_dir", a.out_dir}, {"seed", *a.ablation}})
               .dump()
        << "\n";
    return;
  }

  const SynthSpec spec = ResolveSpec(a);
  if (!a.fixtures.empty()) {
    const auto seeds = ParseSeeds(a.seeds);
    const auto entries =
        WriteFixtures(a.fixtures, spec, seeds, a.fusion.Resolve());
    out << nlohmann::json({{"fixtures", a.fixtures},
                           {"count", entries.size()}})
               .dump()
        << "\n";
    return;
  }

  const SynthScene scene = Generate(spec);
  if (a.tile_size > 0) {
    if (a.out_dir.empty()) throw UsageError("--tile-size requires --out-dir");
    const fs::path dir = a.out_dir;
    fs::create_directories(dir);
    TileManifest manifest;
    manifest.image_id = scene.bundle.image_id;
    manifest.grid = PlanTiles(spec.height, spec.width, a.tile_size, a.overlap);
    for (std::size_t t = 0; t < manifest.grid.tiles.size(); ++t) {
      const std::string name = "tile_" + std::to_string(t) + ".sov3";
      WriteBundleFile(CropBundle(scene.bundle, manifest.grid.tiles[t]),
                      dir / name);
      manifest.bundles.emplace_back(name);
    }
    WriteTileManifestFile(manifest, dir / "manifest.json");
    WriteLabelMapFile(scene.truth, dir / "truth.lbl");
    WriteClassTableFile(scene.classes, dir / "classes.json");
    out << nlohmann::json({{"out_dir", a.out_dir},
                           {"tiles", manifest.grid.tiles.size()}})
               .dump()
        << "\n";
    return;
  }

  if (a.output.empty()) {
    throw UsageError("synth: one of -o, --ablation, --fixtures or "
                     "--tile-size is required");
  }
  const std::uint64_t bytes = WriteBundleFile(scene.bundle, a.output);
  if (!a.truth.empty()) WriteLabelMapFile(scene.truth, a.truth);
  if (!a.classes_out.empty()) WriteClassTableFile(scene.classes, a.classes_out);
  out << nlohmann::json({{"output", a.output}, {"bytes", bytes}}).dump()
      << "\n";
}

// inspect ------------------------------------------------------------------

struct InspectArgs {
  std::string input;
  bool json = false;
};

struct Range {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  void Add(std::span<const float> values) {
    for (float v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  nlohmann::json ToJson() const {
    if (lo > hi) return nullptr;
    return nlohmann::json::array({lo, hi});
  }
};

void RunInspect(const InspectArgs& a, std::ostream& out) {
  ReadReport report;
  const HeadBundle bundle = ReadBundleFile(a.input, &report);
  nlohmann::json j;
  j["image_id"] = bundle.image_id;
  j["height"] = bundle.height;
  j["width"] = bundle.width;
  j["categories"] = nlohmann::json::array();
  for (const auto& cat : bundle.categories) {
    nlohmann::json jc;
    jc["name"] = cat.name;
    jc["prompts"] = nlohmann::json::array();
    for (const auto& p : cat.prompts) {
      Range sem;
      Range inst;
      Range conf;
      std::size_t dense = 0;
      if (p.semantic_map) sem.Add(p.semantic_map->values());
      for (const auto& i : p.instances) {
        inst.Add(i.values);
        conf.Add(std::span<const float>(&i.confidence, 1));
        if (i.encoding == InstanceEncoding::kDense) ++dense;
      }
      jc["prompts"].push_back(
          {{"text", p.prompt_text},
           {"presence", p.presence},
           {"semantic_map", p.semantic_map.has_value()},
           {"semantic_range", sem.ToJson()},
           {"instances", p.instances.size()},
           {"dense_instances", dense},
           {"cropped_instances", p.instances.size() - dense},
           {"instance_value_range", inst.ToJson()},
           {"confidence_range", conf.ToJson()}});
    }
    j["categories"].push_back(std::move(jc));
  }
  nlohmann::json warnings = nlohmann::json::array();
  if (report.clamped_values > 0) {
    warnings.push_back(std::to_string(report.clamped_values) +
                       " values within 1e-6 of [0,1] were clamped (first: " +
                       report.first_clamped_field + ")");
  }
  j["warnings"] = warnings;
  if (a.json) {
    out << j.dump(2) << "\n";
    return;
  }
  out << "image_id: " << bundle.image_id << "\n"
      << "size: " << bundle.height << "x" << bundle.width << "\n"
      << "categories: " << bundle.categories.size() << "\n";
  for (const auto& jc : j["categories"]) {
    out << "  " << jc["name"].get<std::string>() << "\n";
    for (const auto& jp : jc["prompts"]) {
      out << "    prompt " << jp["text"].dump()
          << ": presence=" << jp["presence"].get<float>()
          << " semantic=" << (jp["semantic_map"].get<bool>() ? "yes" : "no")
          << " range=" << jp["semantic_range"].dump()
          << " instances=" << jp["instances"].get<std::size_t>()
          << " (dense " << jp["dense_instances"].get<std::size_t>()
          << ", cropped " << jp["cropped_instances"].get<std::size_t>()
          << ") conf=" << jp["confidence_range"].dump() << "\n";
    }
  }
  out << "warnings: " << warnings.size() << "\n";
  for (const auto& w : warnings) out << "  " << w.get<std::string>() << "\n";
}

void ReportError(std::ostream& err, const std::string& kind,
                 const std::string& message, const std::string& command) {
  err << nlohmann::json({{"error", kind},
                         {"message", message},
                         {"command", command}})
             .dump()
      << "\n";
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"segfuse: fuse open-vocabulary segmentation head outputs"};
  app.require_subcommand(1);

  FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a bundle or tile manifest "
                                              "into a label raster");
  fuse_cmd->add_option("-i,--input", fuse.input, "SOV3 bundle or tile manifest")
      ->required();
  fuse_cmd->add_option("-c,--classes", fuse.classes, "Class table JSON")
      ->required();
  fuse_cmd->add_option("-o,--output", fuse.output, "Output label raster")
      ->required();
  fuse.fusion.Register(fuse_cmd);
  fuse_cmd->add_option("--tile-size", fuse.tile_size,
                       "Tile an in-memory bundle with this window size");
  fuse_cmd->add_option("--overlap", fuse.overlap, "Tile overlap in pixels");
  fuse_cmd->add_option("--threads", fuse.threads, "Worker threads");
  fuse_cmd->add_option("--heads", fuse.heads,
                       "both | instance | semantic (ablation)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against "
                                              "ground truth");
  eval_cmd->add_option("-p,--pred", eval.pred, "Predicted label raster(s)")
      ->required();
  eval_cmd->add_option("-t,--truth", eval.truth, "Ground-truth raster(s)")
      ->required();
  eval_cmd->add_option("-c,--classes", eval.classes, "Class table JSON")
      ->required();
  eval_cmd->add_option("--foreground", eval.foreground,
                       "Print only this class's IoU");
  eval_cmd->add_option("--json", eval.json_out, "Write the JSON report here");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render a label raster to "
                                                  "PNG");
  render_cmd->add_option("-l,--labels", render.labels, "Label raster")
      ->required();
  render_cmd->add_option("-c,--classes", render.classes, "Class table JSON")
      ->required();
  render_cmd->add_option("-o,--output", render.output, "Output PNG")
      ->required();
  render_cmd->add_option("--palette", render.palette,
                         "JSON {\"class\": [r, g, b]} overrides");
  render_cmd->add_option("--ignore", render.ignore,
                         "transparent | black for ignore pixels");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic bundles and "
                                                "fixtures");
  synth_cmd->add_option("--spec", synth.spec_path, "SynthSpec JSON");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--height", synth.height);
  synth_cmd->add_option("--width", synth.width);
  synth_cmd->add_option("--categories", synth.categories);
  synth_cmd->add_option("--prompts", synth.prompts);
  synth_cmd->add_option("--max-instances", synth.max_instances);
  synth_cmd->add_option("--stuff-fraction", synth.stuff_fraction);
  synth_cmd->add_option("--noise", synth.noise);
  synth_cmd->add_option("--distractors", synth.distractors);
  synth_cmd->add_flag("--no-background", synth.no_background);
  synth_cmd->add_option("-o,--output", synth.output, "Bundle path");
  synth_cmd->add_option("--truth", synth.truth, "Ground-truth raster path");
  synth_cmd->add_option("--classes-out", synth.classes_out,
                        "Class table path");
  synth_cmd->add_option("--out-dir", synth.out_dir,
                        "Directory for --ablation or --tile-size output");
  synth_cmd->add_option("--tile-size", synth.tile_size,
                        "Split the scene into per-tile bundles + manifest");
  synth_cmd->add_option("--overlap", synth.overlap);
  synth_cmd->add_option("--ablation", synth.ablation,
                        "Write the three-bundle ablation scene for a seed");
  synth_cmd->add_flag("--things-only", synth.things_only,
                      "Ablation scene without stuff classes");
  synth_cmd->add_option("--fixtures", synth.fixtures,
                        "Write a fixture directory with manifest.json");
  synth_cmd->add_option("--seeds", synth.seeds, "Seeds for --fixtures, "
                                                "e.g. 0-9");
  synth.fusion.Register(synth_cmd);

  InspectArgs inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Validate and summarize "
                                                    "a bundle");
  inspect_cmd->add_option("-i,--input", inspect.input, "SOV3 bundle")
      ->required();
  inspect_cmd->add_flag("--json", inspect.json, "JSON output");

  std::string command = args.empty() ? "" : args.front();
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    ReportError(err, "usage", e.what(), command);
    return kExitInput;
  }

  try {
    if (*fuse_cmd) {
      RunFuse(fuse, out);
    } else if (*eval_cmd) {
      RunEval(eval, out);
    } else if (*render_cmd) {
      RunRender(render, out, err);
    } else if (*synth_cmd) {
      RunSynth(synth, out);
    } else if (*inspect_cmd) {
      RunInspect(inspect, out);
    }
  } catch (const Error& e) {
    ReportError(err, e.kind(), e.what(), command);
    return kExitInput;
  } catch (const std::exception& e) {
    ReportError(err, "internal", e.what(), command);
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace segfuse::tools
