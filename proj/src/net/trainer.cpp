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

#include "asmo/trainer.hpp"

#include <algorithm>

#include "asmo/kernels.hpp"

namespace asmo::net {

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw BadInput("train.learning_rate must be > 0");
  if (!(momentum >= 0 && momentum < 1)) throw BadInput("train.momentum must lie in [0,1)");
  if (weight_decay < 0) throw BadInput("train.weight_decay must be >= 0");
  if (minibatch < 1) throw BadInput("train.minibatch must be >= 1");
  if (loss_accumulation < 1) throw BadInput("train.loss_accumulation must be >= 1");
  if (iterations_per_round < 0) throw BadInput("train.iterations_per_round must be >= 0");
  if (validation_interval < 1) throw BadInput("train.validation_interval must be >= 1");
}

SgdState SgdState::zeros_like(const NetParams& params) {
  SgdState s;
  s.velocity = Gradients::zeros_like(params);
  return s;
}

namespace {

void step_tensor(Tensor& p, Tensor& v, const Tensor& g, const TrainConfig& cfg) {
  if (!p.same_shape(g) || !p.same_shape(v))
    throw ShapeError("sgd_step: parameter/gradient/velocity shapes differ");
  kern::active().sgd_update_f64(p.ptr(), v.ptr(), g.ptr(), p.numel(), cfg.learning_rate,
                                cfg.momentum, cfg.weight_decay);
}

}  // namespace

void sgd_step(NetParams& params, const Gradients& grads, const TrainConfig& cfg,
              SgdState& state, ParamFilter filter) {
  cfg.validate();
  if (params.backbone.size() != grads.backbone.size())
    throw ShapeError("sgd_step: backbone stage count mismatch");
  for (std::size_t i = 0; i < params.backbone.size(); ++i) {
    step_tensor(params.backbone[i].w, state.velocity.backbone[i].w, grads.backbone[i].w, cfg);
    step_tensor(params.backbone[i].b, state.velocity.backbone[i].b, grads.backbone[i].b, cfg);
  }
  step_tensor(params.sal_w, state.velocity.sal_w, grads.sal_w, cfg);
  step_tensor(params.sal_b, state.velocity.sal_b, grads.sal_b, cfg);
  if (filter == ParamFilter::kAll) {
    step_tensor(params.cls_w, state.velocity.cls_w, grads.cls_w, cfg);
    step_tensor(params.cls_b, state.velocity.cls_b, grads.cls_b, cfg);
  }
}

namespace {

bool usable_mask(const BinaryMask& m) {
  const std::size_t pos = m.count_positive();
  return pos > 0 && pos < m.values.size();
}

double validation_loss(const std::vector<TrainSample>& validation, const NetParams& params,
                       const NetConfig& net_cfg) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& s : validation) {
    LossOptions opts;
    opts.use_saliency = usable_mask(s.target);
    opts.use_classification = !s.labels.empty();
    if (!opts.use_saliency && !opts.use_classification) continue;
    std::vector<double> target;
    if (opts.use_classification)
      target = classification_target(s.labels, net_cfg.n_classes);
    sum += evaluate_loss(s.image, opts.use_saliency ? &s.target : nullptr,
                         opts.use_classification ? &target : nullptr, params, net_cfg, opts);
    ++counted;
  }
  if (counted == 0) throw EmptyDataset("validation split has no usable sample");
  return sum / static_cast<double>(counted);
}

}  // namespace

TrainRoundResult train_round(const std::vector<TrainSample>& train,
                             const std::vector<TrainSample>& validation,
                             const TrainConfig& cfg, const NetConfig& net_cfg,
                             const NetParams& initial, ParamFilter filter) {
  cfg.validate();
  net_cfg.validate();
  if (train.empty()) throw EmptyDataset("train_round needs at least one training sample");

  TrainRoundResult result;
  result.best_params = initial;
  if (cfg.iterations_per_round == 0) return result;

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (usable_mask(train[i].target))
      usable.push_back(i);
    else
      ++result.skipped_degenerate;
  }
  if (usable.empty())
    throw EmptyDataset("every training annotation is single-class; nothing to learn from");

  Rng rng(cfg.rng_seed);
  NetParams params = initial;
  SgdState state = SgdState::zeros_like(params);
  Gradients accum = Gradients::zeros_like(params);
  Gradients sample_grads = Gradients::zeros_like(params);
  int accum_count = 0;

  std::vector<std::size_t> order = usable;
  rng.shuffle(order);
  std::size_t cursor = 0;
  const auto next_index = [&]() {
    if (cursor == order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    return order[cursor++];
  };

  const auto validate_now = [&](int iteration) {
    const double loss = validation_loss(validation, params, net_cfg);
    result.history.push_back({iteration, loss});
    if (loss < result.best_validation_loss) {
      result.best_validation_loss = loss;
      result.best_params = params;
    }
  };

  for (int iter = 1; iter <= cfg.iterations_per_round; ++iter) {
    sample_grads.zero();
    double batch_scale = 1.0 / cfg.minibatch;
    for (int b = 0; b < cfg.minibatch; ++b) {
      const TrainSample& s = train[next_index()];
      LossOptions opts;
      opts.use_saliency = true;
      opts.use_classification = !s.labels.empty();
      opts.classification_backprop_into_features = false;
      std::vector<double> target;
      if (opts.use_classification)
        target = classification_target(s.labels, net_cfg.n_classes);
      forward_backward(s.image, &s.target, opts.use_classification ? &target : nullptr,
                       params, net_cfg, opts, sample_grads);
    }
    accum.add_scaled(sample_grads, batch_scale);
    ++accum_count;

    if (accum_count == cfg.loss_accumulation) {
      Gradients step = Gradients::zeros_like(params);
      step.add_scaled(accum, 1.0 / accum_count);
      sgd_step(params, step, cfg, state, filter);
      accum.zero();
      accum_count = 0;
    }

    if (iter % cfg.validation_interval == 0 || iter == cfg.iterations_per_round)
      validate_now(iter);
  }

  return result;
}

}  // namespace asmo::net
