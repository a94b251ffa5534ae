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

#include <vector>

#include "asmo/image.hpp"
#include "asmo/rng.hpp"
#include "asmo/tensor.hpp"

namespace asmo::net {

// Multi-scale fully convolutional network with two heads. The same
// backbone (shared weights) runs on several rescaled copies of the input;
// each copy yields a two-channel saliency map at 1/8 of its resolution.
// Per-scale foreground-minus-background logits are upsampled to the input
// resolution, summed and squashed into the fused probability map. The
// backbone feature maps of all scales, resized onto the full-scale 1/8
// grid and concatenated, feed a global-average-pooling classifier whose
// weights also define the class activation maps.
struct NetConfig {
  std::vector<double> scales{0.5, 0.75, 1.0};
  std::vector<int> backbone_channels{16, 32, 64, 64};
  int n_classes = 2;
  int feature_stride = 8;  // product of the backbone strides (2,2,2,1)

  int feature_channels() const { return backbone_channels.back(); }
  int concat_channels() const {
    return static_cast<int>(scales.size()) * feature_channels();
  }
  void validate() const;
};

// Backbone stage strides are structural: three halvings to reach the 1/8
// grid, then a stride-1 stage.
inline constexpr int kBackboneStrides[4] = {2, 2, 2, 1};

struct ConvStage {
  Tensor w;  // [out][in][3][3]
  Tensor b;  // [out]
};

struct NetParams {
  std::vector<ConvStage> backbone;
  Tensor sal_w;  // [2][feature_channels] 1x1 head
  Tensor sal_b;  // [2]
  Tensor cls_w;  // [n_classes][concat_channels]
  Tensor cls_b;  // [n_classes]

  void validate_against(const NetConfig& cfg) const;
  std::size_t parameter_count() const;
};

// Glorot-uniform kernels from the seeded generator, zero biases.
NetParams init_params(const NetConfig& cfg, Rng& rng);

struct ForwardOutputs {
  // M_c^s: per-scale two-channel logits at that scale's 1/8 grid.
  std::vector<Tensor> scale_logits;
  // Input-resolution foreground probability, strictly inside (0,1).
  SaliencyMap fused_prob;
  std::vector<double> class_scores;  // length n_classes
  // Per-scale backbone features resized to the full-scale 1/8 grid and
  // concatenated: [concat_channels][gh][gw].
  Tensor concat_features;
  std::vector<double> gap;  // per-channel means of concat_features
  int input_width = 0;
  int input_height = 0;
};

ForwardOutputs forward(const Image& image, const NetParams& params, const NetConfig& cfg);

// Raw per-class activation map: sum_k w_k^c * f_k on the 1/8 grid.
Tensor compute_cam_raw(const ForwardOutputs& outputs, const NetParams& params, int c);

// Raw map upsampled to input resolution and min-max normalized to [0,1]
// (a constant raw map normalizes to all zeros).
SaliencyMap compute_cam(const ForwardOutputs& outputs, const NetParams& params, int c);

// Mean of the normalized maps of the k highest-scoring classes; score
// ties break toward the lower class index.
SaliencyMap top_k_cam_mean(const ForwardOutputs& outputs, const NetParams& params, int k);

struct LossBreakdown {
  double total = 0.0;
  double beta = 0.0;  // negative-pixel share, the class-balance weight
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_total = 0;
};

// Class-balanced sigmoid cross entropy:
//   L = -beta * sum_{g=1} log p  -  (1-beta) * sum_{g=0} log(1-p),
// beta = n_neg/n_total, with p clamped to [1e-7, 1-1e-7] inside the logs.
LossBreakdown saliency_loss(const SaliencyMap& pred_prob, const BinaryMask& g);

// 0.5 * sum_c (scores_c - target_c)^2.
double classification_loss(const std::vector<double>& scores,
                           const std::vector<double>& target);

// Multi-hot label vector divided by the label count (a distribution).
std::vector<double> classification_target(const std::vector<int>& labels, int n_classes);

struct Gradients {
  std::vector<ConvStage> backbone;
  Tensor sal_w, sal_b, cls_w, cls_b;

  static Gradients zeros_like(const NetParams& params);
  void zero();
  void add_scaled(const Gradients& other, double scale);
};

struct LossOptions {
  bool use_saliency = true;
  bool use_classification = false;
  // Training follows the weak-label recipe: the classification loss only
  // updates the classifier weights. The gradient checker enables full
  // flow so finite differences of the summed loss match everywhere.
  bool classification_backprop_into_features = false;
};

// Forward plus manual backward; accumulates dL/dparams into `grads`
// (caller zeroes or averages). `target_mask` may be null when the
// saliency loss is disabled, `cls_target` when classification is.
// Returns the total loss.
double forward_backward(const Image& image, const BinaryMask* target_mask,
                        const std::vector<double>* cls_target, const NetParams& params,
                        const NetConfig& cfg, const LossOptions& opts, Gradients& grads);

// Loss-only evaluation with identical semantics (used by validation and
// by finite differencing).
double evaluate_loss(const Image& image, const BinaryMask* target_mask,
                     const std::vector<double>* cls_target, const NetParams& params,
                     const NetConfig& cfg, const LossOptions& opts);

}  // namespace asmo::net
