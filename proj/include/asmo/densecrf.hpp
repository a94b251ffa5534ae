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

namespace asmo::crf {

// Two-class fully connected CRF with a bilateral (position + color) kernel
// and a spatial smoothness kernel, solved by parallel mean-field updates.
struct CrfParams {
  int iterations = 10;
  double w_bilateral = 5.0;
  double w_spatial = 3.0;
  double theta_alpha = 60.0;  // bilateral spatial stddev, pixels
  double theta_beta = 10.0;   // bilateral color stddev, 8-bit units
  double theta_gamma = 3.0;   // smoothness spatial stddev, pixels
  double unary_clamp = 1e-5;  // probability clamp before the log

  void validate() const;
};

struct UnaryPotentials {
  int width = 0;
  int height = 0;
  // Negative log-probabilities, u_fg = -log(clamp(p)), u_bg = -log(clamp(1-p)).
  std::vector<double> u_fg;
  std::vector<double> u_bg;
};

UnaryPotentials build_unary(const SaliencyMap& map, const CrfParams& params);

enum class PairwiseBackend {
  kLattice,     // permutohedral approximation, near-linear time
  kBruteForce,  // exact O(N^2) message passing
};

// Runs `params.iterations` rounds of parallel mean-field updates with Potts
// compatibility and returns the foreground marginal. Q_fg + Q_bg = 1 holds
// after every update; outputs are strictly inside (0,1).
SaliencyMap mean_field_refine(const Image& image, const SaliencyMap& map,
                              const CrfParams& params,
                              PairwiseBackend backend = PairwiseBackend::kLattice);

}  // namespace asmo::crf
