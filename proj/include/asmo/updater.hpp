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

#include <optional>

#include "asmo/densecrf.hpp"
#include "asmo/image.hpp"

namespace asmo::updater {

// The six maps one annotation-update decision consumes: the current
// annotation, the network prediction, the mean activation map, and their
// CRF refinements.
struct AnnotationBundle {
  SaliencyMap s_anno;
  SaliencyMap s_predict;
  SaliencyMap s_cam;
  SaliencyMap crf_anno;
  SaliencyMap crf_predict;
  SaliencyMap crf_cam;
};

// Agreement thresholds on the internal [0,1] scale. The file-scale values
// 15 and 40 (8-bit units) map to 15/255 and 40/255.
struct UpdaterThresholds {
  double alpha = 15.0 / 255.0;
  double beta = 40.0 / 255.0;

  void validate() const;
};

enum class UpdateBranch {
  kAgreement = 1,   // annotation and prediction agree: keep CRF of their mean
  kDiscard = 2,     // both disagree with the activation map beyond beta
  kKeepAnno = 3,    // annotation is closer to the activation map
  kKeepPredict = 4  // prediction is closer
};

struct UpdateDecision {
  UpdateBranch branch;
  std::optional<SaliencyMap> s_update;  // empty exactly for kDiscard
  // The three distances the decision was based on, for the audit log.
  double mae_anno_predict = 0.0;
  double mae_anno_cam = 0.0;
  double mae_predict_cam = 0.0;
};

// CRF-refines the three raw maps against the image.
AnnotationBundle prepare_bundle(const Image& image, const SaliencyMap& s_anno,
                                const SaliencyMap& s_predict, const SaliencyMap& s_cam,
                                const crf::CrfParams& crf_params,
                                crf::PairwiseBackend backend = crf::PairwiseBackend::kLattice);

// Branch order:
//   1. mae(crf_anno, crf_predict) <= alpha
//        -> keep CRF((s_anno + s_predict)/2)
//   2. mae(crf_anno, crf_cam) > beta and mae(crf_predict, crf_cam) > beta
//        -> discard the sample
//   3. mae(crf_anno, crf_cam) <= mae(crf_predict, crf_cam)  -> keep crf_anno
//   4. otherwise                                            -> keep crf_predict
// A tie at branch 3 keeps the annotation side.
UpdateDecision update_annotation(const Image& image, const AnnotationBundle& bundle,
                                 const UpdaterThresholds& thresholds,
                                 const crf::CrfParams& crf_params,
                                 crf::PairwiseBackend backend = crf::PairwiseBackend::kLattice);

}  // namespace asmo::updater
