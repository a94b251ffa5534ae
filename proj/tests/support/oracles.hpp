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

// Independent reference implementations the tests compare against. These
// stay deliberately naive (straight loops, no shared code with the
// library paths they check).

#pragma once

#include <vector>

#include "asmo/densecrf.hpp"
#include "asmo/image.hpp"
#include "asmo/metrics.hpp"
#include "asmo/net.hpp"
#include "asmo/rng.hpp"

namespace asmo::testsupport {

// -- metrics ----------------------------------------------------------------

double oracle_mae(const SaliencyMap& a, const SaliencyMap& b);

struct OracleConfusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};
OracleConfusion oracle_confusion(const SaliencyMap& pred, const BinaryMask& gt,
                                 double threshold);

std::vector<metrics::PrPoint> oracle_pr_curve(const std::vector<SaliencyMap>& preds,
                                              const std::vector<BinaryMask>& gts,
                                              int n_thresholds);

double oracle_max_f(const std::vector<metrics::PrPoint>& curve);

// -- dense CRF ---------------------------------------------------------------

// Plain O(N^2) parallel mean-field with Potts compatibility; the
// reference side of the lattice equivalence checks.
SaliencyMap oracle_mean_field(const Image& image, const SaliencyMap& map,
                              const crf::CrfParams& params);

// -- minimum barrier distance -------------------------------------------------

// Exact MBD from the seed set via threshold-pair reachability: the
// distance of pixel i is the smallest hi-lo over value windows [lo, hi]
// such that i connects to a seed through pixels within the window.
std::vector<float> oracle_exact_mbd(const std::vector<float>& plane, int width, int height,
                                    const std::vector<std::uint8_t>& is_seed);

// -- toy network ---------------------------------------------------------------

// Straight-line reference of the multi-scale forward pass: direct
// convolution loops, no kernel dispatch, no reuse of library helpers
// beyond the shared sampling convention.
struct NaiveForwardResult {
  std::vector<double> fused_prob;      // input resolution
  std::vector<double> class_scores;    // n_classes
  std::vector<std::vector<double>> scale_logits;  // per scale, 2 planes
};
NaiveForwardResult naive_forward(const Image& image, const net::NetParams& params,
                                 const net::NetConfig& cfg);

// -- shared fixture helpers -----------------------------------------------------

Image random_image(Rng& rng, int width, int height);
SaliencyMap random_map(Rng& rng, int width, int height, float lo = 0.0f, float hi = 1.0f);
BinaryMask random_mask(Rng& rng, int width, int height);

// Blocky scene with 2-3 flat color regions plus per-pixel noise; the
// image family the bilateral kernel is meant for.
Image cluster_image(Rng& rng, int width, int height, int color_noise);

}  // namespace asmo::testsupport
