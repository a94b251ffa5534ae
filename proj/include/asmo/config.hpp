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

#include <string>

#include "asmo/densecrf.hpp"
#include "asmo/net.hpp"
#include "asmo/seed.hpp"
#include "asmo/trainer.hpp"
#include "asmo/updater.hpp"

namespace asmo::pipeline {

struct PipelineConfig {
  int max_rounds = 5;
  double stop_mean_mae = 0.05;
  int cam_top_k_stage1 = 3;
  int cam_top_k_stage2 = 5;
  double binarize_threshold = 0.5;
  double validation_fraction = 0.2;
  int threads = 1;
  crf::CrfParams crf;
  updater::UpdaterThresholds thresholds;
  net::TrainConfig train;
  net::NetConfig net;
  seed::SeedConfig seed;

  void validate() const;
};

// Line-oriented `key = value` configuration; '#' starts a comment. Nested
// fields use dotted keys (crf.iterations, train.learning_rate,
// net.scales = 0.5,0.75,1). Unknown keys are errors.
PipelineConfig load_config(const std::string& path);
void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value);
void save_config(const PipelineConfig& cfg, const std::string& path);

}  // namespace asmo::pipeline
