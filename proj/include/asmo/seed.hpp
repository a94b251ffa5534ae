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

namespace asmo {
namespace pipeline {
struct DatasetManifest;
}

namespace seed {

// Unsupervised seed detector: approximate minimum barrier distance from
// background seeds via alternating raster/inverse-raster sweeps.
struct SeedConfig {
  int passes = 3;               // forward+backward sweep pairs
  bool use_boundary_seeds = true;  // border pixels seed the background;
                                   // when false only the four corners do
  int post_blur_radius = 2;     // box blur radius, 0 disables

  void validate() const;
};

// Per-channel approximate MBD from the seed set, channels summed, then
// optional blur and min-max normalization to [0,1]. Border seeds carry
// distance 0, so a constant image maps to all zeros.
SaliencyMap mbd_seed_saliency(const Image& image, const SeedConfig& cfg);

// Approximate per-pixel minimum barrier distance for one channel plane
// (values in [0,1]); exposed so the raster-scan approximation can be
// checked against exhaustive oracles on tiny grids.
std::vector<float> mbd_channel_distance(const std::vector<float>& plane, int width,
                                        int height, const std::vector<uint8_t>& is_seed,
                                        int passes);

// Reads one grayscale map per manifest entry from `dir` (same file stem as
// the image, .png). Order follows the manifest. Missing files raise
// MissingMap; size mismatches raise DimensionMismatch naming the entry.
std::vector<SaliencyMap> load_external_saliency(const std::string& dir,
                                                const pipeline::DatasetManifest& manifest);

}  // namespace seed
}  // namespace asmo
