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

#pragma once

#include <functional>
#include <string>

#include "asmo/config.hpp"
#include "asmo/manifest.hpp"
#include "asmo/metrics.hpp"
#include "asmo/synth.hpp"

namespace asmo::pipeline {

enum class StopReason { kNone, kThreshold, kRoundCap };

struct RoundState {
  int round_index = 0;
  std::vector<double> mean_mae_history;
  double best_validation_loss = 0.0;
  int discarded_count = 0;
  StopReason stop_reason = StopReason::kNone;
};

struct StageResult {
  net::NetParams params;
  RoundState state;
};

// Alternating optimization on a labeled manifest: train, predict, refine,
// update annotations, until mean annotation/prediction MAE drops below
// the threshold or the round cap is hit. Mutates the manifest (discard
// flags, annotation paths of training entries). Artifacts land under
// workdir: seeds/ (when annotations were missing), anno_round_<r>/,
// params_round_<r>.ckpt, params.ckpt, audit.log, rounds.txt,
// manifest_round_<r>.tsv.
StageResult run_stage1(DatasetManifest& manifest, const PipelineConfig& cfg,
                       const std::string& workdir);

// Label-free refinement of the saliency stream, guided by activation maps
// computed once from the stage-1 parameters. The classifier tensors are
// never touched.
StageResult run_stage2(DatasetManifest& manifest, const net::NetParams& stage1_params,
                       const PipelineConfig& cfg, const std::string& workdir);

// Writes the fused probability map of every active entry to out_dir
// (stem.png), in manifest order.
void predict_maps(const DatasetManifest& manifest, const net::NetParams& params,
                  const PipelineConfig& cfg, const std::string& out_dir);

// Seeds every active entry with the built-in unsupervised detector and
// points the entry's annotation at the written map.
void seed_manifest(DatasetManifest& manifest, const PipelineConfig& cfg,
                   const std::string& out_dir);

// Standalone CRF over same-named (image, map) pairs from two directories.
void refine_directory(const std::string& images_dir, const std::string& maps_dir,
                      const std::string& out_dir, const PipelineConfig& cfg);

// Dataset metrics for same-named prediction/mask pairs. Masks binarize at
// 0.5; images whose mask is empty are excluded from the PR curve and
// counted in the report header. Writes <report_prefix>.txt and
// <report_prefix>.kv.
metrics::EvalReport evaluate_dataset(const std::string& preds_dir, const std::string& gts_dir,
                                     const PipelineConfig& cfg,
                                     const std::string& report_prefix);

// PR-curve CSV (threshold,precision,recall) for plotting.
void write_pr_csv(const metrics::EvalReport& report, const std::string& path);

// Deterministic ordered parallel map; n <= 1 threads runs inline.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace asmo::pipeline
