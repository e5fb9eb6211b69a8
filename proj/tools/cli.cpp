// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "cocoaan/checkpoint.hpp"
#include "cocoaan/config.hpp"
#include "cocoaan/dataset.hpp"
#include "cocoaan/errors.hpp"
#include "cocoaan/evaluation.hpp"
#include "cocoaan/image_io.hpp"
#include "cocoaan/trainer.hpp"

namespace cocoaan::cli {
namespace {

namespace fs = std::filesystem;

/// Config-file keys settable from the command line as --<key with dashes>.
const char* const kTrainKeys[] = {
    "resolution", "code_dim",   "width_mult", "lr_s",           "lr_c",
    "lr_g",       "lr_d",       "beta1",      "beta2",          "lambda",
    "batch_size", "iterations", "checkpoint_every", "non_saturating",
    "generator_phase_updates_d", "clip_norm", "precision"};
const char* const kSynthKeys[] = {"n_styles",      "n_contents",    "resolution",
                                  "thickness_min", "thickness_max", "slant_min_deg",
                                  "slant_max_deg", "scale_min",     "scale_max",
                                  "serif_probability"};

std::string flag_name(std::string key) {
  for (char& ch : key) {
    if (ch == '_') ch = '-';
  }
  return "--" + key;
}

/// --config plus per-key overrides, merged into one ConfigMap.
class ConfigOptions {
 public:
  void attach(CLI::App& app, std::span<const char* const> keys) {
    app.add_option("--config", config_path_, "key = value config file");
    app.add_option("--seed", seed_, "RNG seed");
    for (const char* key : keys) {
      app.add_option(flag_name(key), overrides_[key], std::string("overrides config key ") + key);
    }
  }

  ConfigMap merged() const {
    ConfigMap map = config_path_.empty() ? ConfigMap{} : read_config_file(config_path_);
    for (const auto& [key, value] : overrides_) {
      if (value) map[key] = *value;
    }
    if (seed_) map["seed"] = *seed_;
    return map;
  }

 private:
  std::string config_path_;
  std::optional<std::string> seed_;
  std::map<std::string, std::optional<std::string>> overrides_;
};

GlyphDataset load_dataset(const fs::path& root, std::ostream& err) {
  std::vector<std::string> warnings;
  GlyphDataset ds = ingest_images(root, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return ds;
}

std::optional<Id> find_label(const std::vector<std::string>& labels, const std::string& label) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<Id>(i);
  }
  return std::nullopt;
}

Id require_label(const std::vector<std::string>& labels, const std::string& label,
                 const char* role) {
  auto id = find_label(labels, label);
  if (!id) throw DataError(std::string("unknown ") + role + " label '" + label + "'");
  return *id;
}

/// Re-keys an ingested dataset onto the checkpoint manifest by label.
std::vector<CellKey> matching_cells(const GlyphDataset& ds, const Manifest& model) {
  std::vector<CellKey> out;
  for (const auto& k : ds.cells()) {
    const auto& m = ds.manifest();
    const auto s = find_label(model.style_labels, m.style_labels[static_cast<std::size_t>(k.style)]);
    const auto c =
        find_label(model.content_labels, m.content_labels[static_cast<std::size_t>(k.content)]);
    if (s && c && *s == k.style && *c == k.content) out.push_back(k);
  }
  return out;
}

Tensor stack_images(const std::vector<GrayImage>& images, int resolution) {
  std::vector<double> data;
  for (const auto& img : images) {
    if (img.width != resolution || img.height != resolution) {
      throw DataError("glyph is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                      ", model expects " + std::to_string(resolution));
    }
    const auto px = to_signed_unit(img.pixels);
    data.insert(data.end(), px.begin(), px.end());
  }
  return Tensor({static_cast<std::int64_t>(images.size()), 1, resolution, resolution},
                std::move(data));
}

void write_code_csv(std::ostream& out, const std::string& role, const std::string& label,
                    const std::vector<double>& code) {
  out << role << ',' << label;
  char buf[32];
  for (double v : code) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  }
  out << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

struct Commands {
  ConfigOptions synth_cfg, ingest_cfg, train_cfg, recon_cfg, style_cfg, content_cfg, interp_cfg,
      export_cfg;
  std::string out_dir, data_dir, checkpoint, resume, glyph_dir, role = "style";
  std::string style_a, style_b, content_label, manifest_out;
  int steps = 8;
};

int cmd_synth(Commands& c, std::ostream& out) {
  SynthConfig cfg;
  ConfigMap map = c.synth_cfg.merged();
  apply_config(map, cfg);
  reject_unknown_keys(map);
  const GlyphDataset ds = synth_dataset(cfg);
  write_dataset_images(ds, c.out_dir);
  auto f = open_out(fs::path(c.out_dir) / "synth.cfg");
  f << serialize_config(cfg);
  out << "wrote " << ds.size() << " glyphs (" << cfg.n_styles << " styles x " << cfg.n_contents
      << " contents, " << cfg.resolution << "px) to " << c.out_dir << '\n';
  return kOk;
}

int cmd_ingest(Commands& c, std::ostream& out, std::ostream& err) {
  ConfigMap map = c.ingest_cfg.merged();
  map.erase("config_version");
  map.erase("seed");
  reject_unknown_keys(map);
  const GlyphDataset ds = load_dataset(c.data_dir, err);
  const fs::path manifest = c.manifest_out.empty() ? fs::path(c.data_dir) / "manifest.csv"
                                                   : fs::path(c.manifest_out);
  auto f = open_out(manifest);
  write_manifest_csv(ds.manifest(), f);
  out << "ingested " << ds.size() << " glyphs: " << ds.style_ids().size() << " styles, "
      << ds.content_ids().size() << " contents, " << ds.resolution() << "px; manifest "
      << manifest.string() << '\n';
  return kOk;
}

int cmd_train(Commands& c, std::ostream& out, std::ostream& err) {
  const GlyphDataset ds = load_dataset(c.data_dir, err);
  TrainState state;
  if (!c.resume.empty()) {
    state = load_checkpoint(c.resume);
    // Only the run length may change on resume.
    ConfigMap map = c.train_cfg.merged();
    TrainConfig cfg = state.config;
    apply_config(map, cfg);
    reject_unknown_keys(map);
    TrainConfig unchanged = cfg;
    unchanged.iterations = state.config.iterations;
    if (unchanged != state.config) {
      throw ConfigError("only 'iterations' may change when resuming; other keys differ from "
                        "the checkpoint config");
    }
    state.config.iterations = cfg.iterations;
    if (state.manifest != ds.manifest()) throw DataError("dataset manifest differs from checkpoint");
  } else {
    TrainConfig cfg;
    cfg.scale.resolution = ds.resolution();
    ConfigMap map = c.train_cfg.merged();
    apply_config(map, cfg);
    reject_unknown_keys(map);
    state = init_train_state(cfg, ds.manifest());
  }
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "train.cfg");
    f << serialize_config(state.config);
  }
  const bool append = !c.resume.empty() && fs::exists(dir / "metrics.csv");
  std::ofstream metrics(dir / "metrics.csv", append ? std::ios::app : std::ios::trunc);
  TrainRunOptions opts;
  opts.checkpoint_dir = dir;
  opts.metrics = &metrics;
  opts.write_header = !append;
  const auto rows = train(state, ds, opts);
  save_checkpoint(state, dir / "final.bin");
  out << "trained to iteration " << state.iteration;
  if (!rows.empty()) out << "; last L1 " << rows.back().loss_l1;
  out << "; checkpoint " << (dir / "final.bin").string() << '\n';
  return kOk;
}

void reject_all(const ConfigOptions& opts) {
  ConfigMap map = opts.merged();
  map.erase("config_version");
  map.erase("seed");
  reject_unknown_keys(map);
}

int cmd_reconstruct(Commands& c, std::ostream& out, std::ostream& err) {
  reject_all(c.recon_cfg);
  const TrainState state = load_checkpoint(c.checkpoint);
  const GlyphDataset ds = load_dataset(c.data_dir, err);
  std::vector<CellKey> keys;
  for (const auto& k : matching_cells(ds, state.manifest)) {
    if (state.z_s.contains(k.style) && state.z_c.contains(k.content)) keys.push_back(k);
  }
  if (keys.empty()) throw StoreMissError("no dataset cell is covered by the checkpoint stores");
  const fs::path dir = c.out_dir;
  const EvalReport report = reconstruct(state, ds, keys, dir / "images");
  auto f = open_out(dir / "report.csv");
  write_report_csv(report, f);
  out << "reconstructed " << report.rows.size() << " glyphs; mean L1 " << report.mean_l1
      << ", median L1 " << report.median_l1 << '\n';
  return kOk;
}

int cmd_new_style(Commands& c, std::ostream& out) {
  reject_all(c.style_cfg);
  const TrainState state = load_checkpoint(c.checkpoint);
  std::vector<GrayImage> images;
  std::vector<Id> contents;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(c.glyph_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .png glyphs in " + c.glyph_dir);
  for (const auto& p : files) {
    contents.push_back(require_label(state.manifest.content_labels, p.stem().string(), "content"));
    images.push_back(read_gray_image(p));
  }
  const auto code =
      learn_new_style(state, stack_images(images, state.config.scale.resolution), contents);
  const fs::path dir = c.out_dir;
  {
    auto f = open_out(dir / "style_code.csv");
    write_code_csv(f, "style", fs::path(c.glyph_dir).filename().string(), code);
  }
  // Render every covered content in the new style.
  std::vector<Id> covered;
  for (const auto& [id, v] : state.z_c.entries()) covered.push_back(id);
  std::vector<double> s_rows, c_rows;
  for (Id id : covered) {
    s_rows.insert(s_rows.end(), code.begin(), code.end());
    const auto& cc = state.z_c.at(id);
    c_rows.insert(c_rows.end(), cc.begin(), cc.end());
  }
  const auto n = static_cast<std::int64_t>(covered.size());
  const std::int64_t d = state.config.scale.code_dim;
  const Tensor frames =
      generate(state, Tensor({n, d}, std::move(s_rows)), Tensor({n, d}, std::move(c_rows)));
  fs::create_directories(dir / "images");
  for (std::int64_t k = 0; k < n; ++k) {
    write_batch_png(frames, k,
                    dir / "images" /
                        (state.manifest.content_labels[static_cast<std::size_t>(covered[k])] + ".png"));
  }
  out << "learned style from " << files.size() << " glyphs; rendered " << n << " contents to "
      << (dir / "images").string() << '\n';
  return kOk;
}

int cmd_new_content(Commands& c, std::ostream& out) {
  reject_all(c.content_cfg);
  const TrainState state = load_checkpoint(c.checkpoint);
  std::vector<GrayImage> images;
  std::vector<Id> styles, contents;
  std::vector<std::string> new_labels;
  std::map<std::string, Id> label_ids;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(c.glyph_dir)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const Id style = require_label(state.manifest.style_labels, dir.filename().string(), "style");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      const std::string label = p.stem().string();
      auto [it, inserted] = label_ids.emplace(label, static_cast<Id>(label_ids.size()));
      if (inserted) new_labels.push_back(label);
      styles.push_back(style);
      contents.push_back(it->second);
      images.push_back(read_gray_image(p));
    }
  }
  if (images.empty()) throw DataError("no glyphs under " + c.glyph_dir);
  const auto codes = learn_new_content(state, stack_images(images, state.config.scale.resolution),
                                       styles, contents);
  auto f = open_out(fs::path(c.out_dir) / "content_codes.csv");
  for (const auto& [id, code] : codes) write_code_csv(f, "content", new_labels[id], code);
  out << "learned " << codes.size() << " content codes from " << images.size() << " glyphs\n";
  return kOk;
}

int cmd_interpolate(Commands& c, std::ostream& out) {
  reject_all(c.interp_cfg);
  const TrainState state = load_checkpoint(c.checkpoint);
  const auto& m = state.manifest;
  const auto& s_a = state.z_s.at(require_label(m.style_labels, c.style_a, "style"));
  const auto& s_b = state.z_s.at(require_label(m.style_labels, c.style_b, "style"));
  const auto& code = state.z_c.at(require_label(m.content_labels, c.content_label, "content"));
  const Tensor frames = interpolate_style(state, s_a, s_b, code, c.steps);
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  for (int k = 0; k < c.steps; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.png", k);
    write_batch_png(frames, k, dir / name);
  }
  out << "wrote " << c.steps << " frames to " << dir.string() << '\n';
  return kOk;
}

int cmd_export(Commands& c, std::ostream& out) {
  reject_all(c.export_cfg);
  const TrainState state = load_checkpoint(c.checkpoint);
  const StoreRole role = parse_store_role(c.role);
  const fs::path path = c.out_dir;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  export_embeddings(state, role, path);
  out << "exported " << (role == StoreRole::style ? state.z_s.size() : state.z_c.size()) << ' '
      << c.role << " codes to " << path.string() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Glyph style/content disentangling GAN", "cocoaan"};
  app.require_subcommand(1);
  Commands c;

  auto* synth = app.add_subcommand("synth-data", "Render a synthetic glyph dataset");
  synth->add_option("--out", c.out_dir, "output dataset directory")->required();
  c.synth_cfg.attach(*synth, kSynthKeys);

  auto* ingest = app.add_subcommand("ingest", "Validate a glyph directory and write its manifest");
  ingest->add_option("--data", c.data_dir, "<root>/<style>/<content>.png")->required();
  ingest->add_option("--manifest", c.manifest_out, "manifest path (default <data>/manifest.csv)");
  c.ingest_cfg.attach(*ingest, {});

  auto* train_cmd = app.add_subcommand("train", "Train all four networks");
  train_cmd->add_option("--data", c.data_dir, "dataset directory")->required();
  train_cmd->add_option("--out", c.out_dir, "run directory")->required();
  train_cmd->add_option("--resume", c.resume, "checkpoint to continue from");
  c.train_cfg.attach(*train_cmd, kTrainKeys);

  auto* recon = app.add_subcommand("reconstruct", "Regenerate covered glyphs and score L1");
  recon->add_option("--checkpoint", c.checkpoint)->required();
  recon->add_option("--data", c.data_dir, "dataset with ground truth")->required();
  recon->add_option("--out", c.out_dir, "report directory")->required();
  c.recon_cfg.attach(*recon, {});

  auto* new_style = app.add_subcommand("new-style", "Learn a style code from an unseen font");
  new_style->add_option("--checkpoint", c.checkpoint)->required();
  new_style->add_option("--glyphs", c.glyph_dir, "directory of <content_label>.png")->required();
  new_style->add_option("--out", c.out_dir, "output directory")->required();
  c.style_cfg.attach(*new_style, {});

  auto* new_content = app.add_subcommand("new-content", "Learn codes for unseen characters");
  new_content->add_option("--checkpoint", c.checkpoint)->required();
  new_content->add_option("--glyphs", c.glyph_dir, "<dir>/<style_label>/<content_label>.png")
      ->required();
  new_content->add_option("--out", c.out_dir, "output directory")->required();
  c.content_cfg.attach(*new_content, {});

  auto* interp = app.add_subcommand("interpolate", "Interpolate between two stored styles");
  interp->add_option("--checkpoint", c.checkpoint)->required();
  interp->add_option("--style-a", c.style_a)->required();
  interp->add_option("--style-b", c.style_b)->required();
  interp->add_option("--content", c.content_label)->required();
  interp->add_option("--steps", c.steps)->check(CLI::Range(2, 1000));
  interp->add_option("--out", c.out_dir, "frame directory")->required();
  c.interp_cfg.attach(*interp, {});

  auto* exp = app.add_subcommand("export-embeddings", "Write a feature store as CSV");
  exp->add_option("--checkpoint", c.checkpoint)->required();
  exp->add_option("--role", c.role)->check(CLI::IsMember({"style", "content"}));
  exp->add_option("--out", c.out_dir, "CSV path")->required();
  c.export_cfg.attach(*exp, {});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  try {
    if (synth->parsed()) return cmd_synth(c, out);
    if (ingest->parsed()) return cmd_ingest(c, out, err);
    if (train_cmd->parsed()) return cmd_train(c, out, err);
    if (recon->parsed()) return cmd_reconstruct(c, out, err);
    if (new_style->parsed()) return cmd_new_style(c, out);
    if (new_content->parsed()) return cmd_new_content(c, out);
    if (interp->parsed()) return cmd_interpolate(c, out);
    if (exp->parsed()) return cmd_export(c, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ShapeError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const CheckpointError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace cocoaan::cli
