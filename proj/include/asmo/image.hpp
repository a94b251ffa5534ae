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
#include <vector>

#include "asmo/errors.hpp"

namespace asmo {

// 8-bit RGB image, row-major interleaved triples. Grayscale files are
// promoted to RGB on decode so there is exactly one image type everywhere.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width*height*3

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* at(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

// Per-pixel saliency/probability in [0,1], row-major. This is the currency
// of the whole pipeline: seed annotations, network predictions, activation
// maps and CRF outputs are all stored in this type. File values q map to
// q/255 internally; see encode_map/decode_map for the quantization rule.
struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // width*height

  SaliencyMap() = default;
  SaliencyMap(int w, int h, float fill = 0.0f)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return values.size(); }
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // width*height, each 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count_positive() const {
    std::size_t n = 0;
    for (auto v : values) n += v;
    return n;
  }
};

// Bilinear resize with the align-corners-false convention: output pixel
// centers sample the source at src = (dst + 0.5) * (in/out) - 0.5, clamped
// to the valid range. Values stay inside the input's [min, max].
SaliencyMap resize_bilinear(const SaliencyMap& map, int out_w, int out_h);

// 1 where value > t, else 0. Strict comparison, shared with the PR-curve
// binarization in metrics.
BinaryMask binarize(const SaliencyMap& map, float t);

inline void require_same_size(int w1, int h1, int w2, int h2, const std::string& what) {
  if (w1 != w2 || h1 != h2)
    throw DimensionMismatch(what + ": " + std::to_string(w1) + "x" + std::to_string(h1) +
                            " vs " + std::to_string(w2) + "x" + std::to_string(h2));
}

}  // namespace asmo
