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
#include <vector>

#include "asmo/image.hpp"

namespace asmo::metrics {

// F-measure weight: F = (1 + b2) P R / (b2 P + R) with b2 = 0.3.
inline constexpr double kFBetaSquared = 0.3;

// Default threshold count for PR curves; matches 8-bit quantization
// granularity. Thresholds are i/(n-1), i = 0..n-1, so both 0 and 1 appear.
inline constexpr int kDefaultThresholds = 256;

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct EvalReport {
  double max_f = 0.0;
  double mae = 0.0;
  std::vector<PrPoint> curve;
};

// Mean absolute per-pixel difference between two equal-size maps.
// Symmetric; result in [0, 1].
double mae(const SaliencyMap& s1, const SaliencyMap& s2);

// Dataset-level PR curve: for each threshold, binarize every prediction
// (strict >), compute per-image precision/recall against its mask, average
// across images. Precision is 1 when nothing is predicted positive; every
// ground-truth mask must contain at least one positive pixel (the caller
// excludes empty ones).
std::vector<PrPoint> dataset_pr_curve(const std::vector<SaliencyMap>& preds,
                                      const std::vector<BinaryMask>& gts,
                                      int n_thresholds = kDefaultThresholds);

// Max over curve points of the weighted F-measure; points with
// b2*P + R == 0 contribute F = 0.
double max_f_measure(const std::vector<PrPoint>& curve);

double f_measure(double precision, double recall);

// Arithmetic mean of per-pair mae; drives the training stop criterion.
double mean_dataset_mae(const std::vector<SaliencyMap>& annos,
                        const std::vector<SaliencyMap>& preds);

// report.txt (line oriented, human readable) and report.kv (machine
// readable: max_f, mae, curve.<i> = threshold,precision,recall).
void write_report(const EvalReport& report, const std::string& txt_path,
                  const std::string& kv_path);
EvalReport read_report_kv(const std::string& kv_path);

}  // namespace asmo::metrics
