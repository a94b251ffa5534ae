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

#include <cstdint>
#include <limits>

#include "asmo/net.hpp"

namespace asmo::net {

struct TrainConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int minibatch = 2;
  int loss_accumulation = 5;  // gradients accumulate this many iterations per step
  int iterations_per_round = 2000;
  std::uint64_t rng_seed = 1;
  int validation_interval = 100;

  void validate() const;
};

// Momentum buffers, one per parameter tensor, in NetParams order.
struct SgdState {
  Gradients velocity;
  static SgdState zeros_like(const NetParams& params);
};

enum class ParamFilter {
  kAll,
  kSaliencyStream,  // backbone + saliency head; classifier untouched
};

// v <- momentum*v + g + weight_decay*p;  p <- p - lr*v, per tensor.
// Tensors excluded by the filter keep both parameter and velocity bits.
void sgd_step(NetParams& params, const Gradients& grads, const TrainConfig& cfg,
              SgdState& state, ParamFilter filter = ParamFilter::kAll);

struct TrainSample {
  Image image;
  BinaryMask target;        // binarized annotation
  std::vector<int> labels;  // empty: no classification loss for this sample
};

struct ValidationPoint {
  int iteration = 0;
  double loss = 0.0;
};

struct TrainRoundResult {
  NetParams best_params;
  std::vector<ValidationPoint> history;
  double best_validation_loss = std::numeric_limits<double>::infinity();
  int skipped_degenerate = 0;  // samples whose mask is all one class
};

// One training round: seeded-shuffle minibatch iterations with gradient
// accumulation, periodic validation against the current annotations, and
// selection of the checkpoint with the lowest validation loss. Samples
// whose mask has no positive or no negative pixel carry no usable
// gradient and are skipped. The classification loss (for labeled
// samples) updates only the classifier tensors; with
// ParamFilter::kSaliencyStream the classifier is frozen entirely.
TrainRoundResult train_round(const std::vector<TrainSample>& train,
                             const std::vector<TrainSample>& validation,
                             const TrainConfig& cfg, const NetConfig& net_cfg,
                             const NetParams& initial,
                             ParamFilter filter = ParamFilter::kAll);

}  // namespace asmo::net
