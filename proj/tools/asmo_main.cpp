// Copyright (c) 2026 the asmo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "asmo/checkpoint.hpp"
#include "asmo/kernels.hpp"
#include "asmo/pipeline.hpp"

namespace {

using namespace asmo;
namespace fs = std::filesystem;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string backend = "auto";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file (key = value lines)");
  cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set crf.iterations=5")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seed", opts.seed, "seed for all random number generators")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--threads", opts.threads, "worker threads for per-image steps (1 = bit-reproducible ordering)");
  cmd->add_option("--backend", opts.backend, "kernel backend: auto|scalar|avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
}

pipeline::PipelineConfig make_config(const CommonOpts& opts) {
  pipeline::PipelineConfig cfg;
  if (!opts.config_path.empty()) cfg = pipeline::load_config(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    pipeline::apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed_set) cfg.train.rng_seed = opts.seed;
  if (opts.threads > 0) cfg.threads = opts.threads;
  kern::force_backend(opts.backend);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alternate saliency map optimization"};
  app.require_subcommand(1);

  // ---- synth -------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  CommonOpts synth_common;
  pipeline::SynthOptions synth_opts;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--images", synth_opts.n_images, "number of images");
  synth->add_option("--classes", synth_opts.n_classes, "number of classes");
  synth->add_option("--size", synth_opts.image_size, "image side length in pixels");
  synth->add_option("--erode", synth_opts.erode_iterations, "seed corruption: erosion depth");
  synth->add_option("--flip", synth_opts.flip_fraction, "seed corruption: flip fraction");
  add_common(synth, synth_common);

  // ---- seed --------------------------------------------------------------
  auto* seed_cmd = app.add_subcommand("seed", "run the built-in unsupervised detector over a manifest");
  CommonOpts seed_common;
  std::string seed_manifest_path, seed_out, seed_manifest_out;
  seed_cmd->add_option("--manifest", seed_manifest_path, "dataset manifest")->required();
  seed_cmd->add_option("--out", seed_out, "directory for the seed maps")->required();
  seed_cmd->add_option("--manifest-out", seed_manifest_out,
                       "where to write the updated manifest (default: <out>/manifest.tsv)");
  add_common(seed_cmd, seed_common);

  // ---- refine ------------------------------------------------------------
  auto* refine = app.add_subcommand("refine", "CRF-refine a directory of (image, map) pairs");
  CommonOpts refine_common;
  std::string refine_images, refine_maps, refine_out;
  refine->add_option("--images", refine_images, "directory of RGB images")->required();
  refine->add_option("--maps", refine_maps, "directory of same-named saliency maps")->required();
  refine->add_option("--out", refine_out, "output directory")->required();
  add_common(refine, refine_common);

  // ---- stage1 ------------------------------------------------------------
  auto* stage1 = app.add_subcommand("stage1", "alternating optimization with image labels");
  CommonOpts stage1_common;
  std::string stage1_manifest, stage1_work;
  stage1->add_option("--manifest", stage1_manifest, "labeled dataset manifest")->required();
  stage1->add_option("--work", stage1_work, "working directory for round artifacts")->required();
  add_common(stage1, stage1_common);

  // ---- stage2 ------------------------------------------------------------
  auto* stage2 = app.add_subcommand("stage2", "label-free finetuning guided by offline activation maps");
  CommonOpts stage2_common;
  std::string stage2_manifest, stage2_work, stage2_params;
  stage2->add_option("--manifest", stage2_manifest, "unlabeled dataset manifest")->required();
  stage2->add_option("--params", stage2_params, "stage-1 checkpoint")->required();
  stage2->add_option("--work", stage2_work, "working directory for round artifacts")->required();
  add_common(stage2, stage2_common);

  // ---- predict -----------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "write fused probability maps for a manifest");
  CommonOpts predict_common;
  std::string predict_manifest, predict_params, predict_out;
  predict->add_option("--manifest", predict_manifest, "dataset manifest")->required();
  predict->add_option("--params", predict_params, "parameter checkpoint")->required();
  predict->add_option("--out", predict_out, "output directory")->required();
  add_common(predict, predict_common);

  // ---- eval --------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "evaluate predictions against ground-truth masks");
  CommonOpts eval_common;
  std::string eval_preds, eval_gts, eval_report = "report";
  eval->add_option("--preds", eval_preds, "directory of predicted maps")->required();
  eval->add_option("--gt", eval_gts, "directory of same-named ground-truth masks")->required();
  eval->add_option("--report", eval_report, "report path prefix (.txt/.kv appended)");
  add_common(eval, eval_common);

  // ---- report ------------------------------------------------------------
  auto* report = app.add_subcommand("report", "emit PR-curve data for plotting");
  CommonOpts report_common;
  std::string report_preds, report_gts, report_csv = "pr_curve.csv", report_prefix = "report";
  report->add_option("--preds", report_preds, "directory of predicted maps")->required();
  report->add_option("--gt", report_gts, "directory of same-named ground-truth masks")->required();
  report->add_option("--csv", report_csv, "output CSV path");
  report->add_option("--report", report_prefix, "report path prefix (.txt/.kv appended)");
  add_common(report, report_common);

  try {
    app.parse(argc, argv);

    if (*synth) {
      auto cfg = make_config(synth_common);
      if (synth_common.seed_set) synth_opts.seed = synth_common.seed;
      const auto manifest = pipeline::generate_synth_dataset(synth_opts, synth_out);
      std::printf("wrote %zu images under %s\n", manifest.entries.size(), synth_out.c_str());
    } else if (*seed_cmd) {
      auto cfg = make_config(seed_common);
      auto manifest = pipeline::load_manifest(seed_manifest_path);
      pipeline::seed_manifest(manifest, cfg, seed_out);
      const std::string out_manifest = seed_manifest_out.empty()
                                           ? (fs::path(seed_out) / "manifest.tsv").string()
                                           : seed_manifest_out;
      pipeline::save_manifest(manifest, out_manifest);
      std::printf("seeded %zu entries; manifest at %s\n", manifest.active_count(),
                  out_manifest.c_str());
    } else if (*refine) {
      auto cfg = make_config(refine_common);
      pipeline::refine_directory(refine_images, refine_maps, refine_out, cfg);
      std::printf("refined maps written to %s\n", refine_out.c_str());
    } else if (*stage1) {
      auto cfg = make_config(stage1_common);
      auto manifest = pipeline::load_manifest(stage1_manifest);
      const auto result = pipeline::run_stage1(manifest, cfg, stage1_work);
      pipeline::save_manifest(manifest, (fs::path(stage1_work) / "manifest_final.tsv").string());
      std::printf("stage1 done: %zu rounds, %d discarded, params at %s/params.ckpt\n",
                  result.state.mean_mae_history.size(), result.state.discarded_count,
                  stage1_work.c_str());
    } else if (*stage2) {
      auto cfg = make_config(stage2_common);
      auto manifest = pipeline::load_manifest(stage2_manifest);
      const auto params = net::load_checkpoint(stage2_params);
      const auto result = pipeline::run_stage2(manifest, params, cfg, stage2_work);
      pipeline::save_manifest(manifest, (fs::path(stage2_work) / "manifest_final.tsv").string());
      std::printf("stage2 done: %zu rounds, %d discarded, params at %s/params.ckpt\n",
                  result.state.mean_mae_history.size(), result.state.discarded_count,
                  stage2_work.c_str());
    } else if (*predict) {
      auto cfg = make_config(predict_common);
      const auto manifest = pipeline::load_manifest(predict_manifest);
      const auto params = net::load_checkpoint(predict_params);
      pipeline::predict_maps(manifest, params, cfg, predict_out);
      std::printf("predictions written to %s\n", predict_out.c_str());
    } else if (*eval) {
      auto cfg = make_config(eval_common);
      const auto rep = pipeline::evaluate_dataset(eval_preds, eval_gts, cfg, eval_report);
      std::printf("max_f = %.6f\nmae = %.6f\nreport at %s.txt\n", rep.max_f, rep.mae,
                  eval_report.c_str());
    } else if (*report) {
      auto cfg = make_config(report_common);
      const auto rep = pipeline::evaluate_dataset(report_preds, report_gts, cfg, report_prefix);
      pipeline::write_pr_csv(rep, report_csv);
      std::printf("max_f = %.6f\nmae = %.6f\ncurve at %s\n", rep.max_f, rep.mae,
                  report_csv.c_str());
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const BadInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
