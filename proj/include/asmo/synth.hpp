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
#include <string>

#include "asmo/manifest.hpp"

namespace asmo::pipeline {

// Synthetic benchmark: scenes of 1-3 colored shapes on textured
// backgrounds. Class identity is the shape/color combination. Every image
// gets an exact mask (evaluation only) and a deliberately degraded seed
// annotation (eroded mask plus flip noise and blur) standing in for the
// output of an unsupervised detector.
struct SynthOptions {
  int n_images = 200;
  int n_classes = 8;
  std::uint64_t seed = 1;
  int image_size = 48;
  int min_shapes = 1;
  int max_shapes = 3;
  int erode_iterations = 2;       // seed corruption: mask erosion depth
  double flip_fraction = 0.08;    // seed corruption: per-pixel flip chance
  int seed_blur_radius = 1;       // seed corruption: box blur radius

  void validate() const;
};

// Writes out_dir/images, out_dir/gt, out_dir/seeds and out_dir/manifest.tsv;
// returns the manifest (annotation = seed map, gt = exact mask).
// Bit-identical output for identical options.
DatasetManifest generate_synth_dataset(const SynthOptions& opts, const std::string& out_dir);

}  // namespace asmo::pipeline
