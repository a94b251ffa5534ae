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

#include "asmo/updater.hpp"

#include "asmo/metrics.hpp"

namespace asmo::updater {

void UpdaterThresholds::validate() const {
  if (!(alpha > 0.0 && alpha < beta && beta < 1.0))
    throw BadInput("updater thresholds need 0 < alpha < beta < 1");
}

AnnotationBundle prepare_bundle(const Image& image, const SaliencyMap& s_anno,
                                const SaliencyMap& s_predict, const SaliencyMap& s_cam,
                                const crf::CrfParams& crf_params,
                                crf::PairwiseBackend backend) {
  require_same_size(image.width, image.height, s_anno.width, s_anno.height, "prepare_bundle");
  require_same_size(image.width, image.height, s_predict.width, s_predict.height,
                    "prepare_bundle");
  require_same_size(image.width, image.height, s_cam.width, s_cam.height, "prepare_bundle");
  AnnotationBundle b;
  b.s_anno = s_anno;
  b.s_predict = s_predict;
  b.s_cam = s_cam;
  b.crf_anno = crf::mean_field_refine(image, s_anno, crf_params, backend);
  b.crf_predict = crf::mean_field_refine(image, s_predict, crf_params, backend);
  b.crf_cam = crf::mean_field_refine(image, s_cam, crf_params, backend);
  return b;
}

UpdateDecision update_annotation(const Image& image, const AnnotationBundle& bundle,
                                 const UpdaterThresholds& thresholds,
                                 const crf::CrfParams& crf_params,
                                 crf::PairwiseBackend backend) {
  thresholds.validate();
  UpdateDecision d{UpdateBranch::kDiscard, std::nullopt, 0.0, 0.0, 0.0};
  d.mae_anno_predict = metrics::mae(bundle.crf_anno, bundle.crf_predict);
  d.mae_anno_cam = metrics::mae(bundle.crf_anno, bundle.crf_cam);
  d.mae_predict_cam = metrics::mae(bundle.crf_predict, bundle.crf_cam);

  if (d.mae_anno_predict <= thresholds.alpha) {
    SaliencyMap mean(bundle.s_anno.width, bundle.s_anno.height);
    for (std::size_t i = 0; i < mean.size(); ++i)
      mean.values[i] = 0.5f * (bundle.s_anno.values[i] + bundle.s_predict.values[i]);
    d.branch = UpdateBranch::kAgreement;
    d.s_update = crf::mean_field_refine(image, mean, crf_params, backend);
  } else if (d.mae_anno_cam > thresholds.beta && d.mae_predict_cam > thresholds.beta) {
    d.branch = UpdateBranch::kDiscard;
  } else if (d.mae_anno_cam <= d.mae_predict_cam) {
    d.branch = UpdateBranch::kKeepAnno;
    d.s_update = bundle.crf_anno;
  } else {
    d.branch = UpdateBranch::kKeepPredict;
    d.s_update = bundle.crf_predict;
  }
  return d;
}

}  // namespace asmo::updater
