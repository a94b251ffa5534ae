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

#include "asmo/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "asmo/png_io.hpp"
#include "asmo/rng.hpp"

namespace asmo::pipeline {

namespace fs = std::filesystem;

void SynthOptions::validate() const {
  if (n_images < 1) throw BadInput("synth: n_images must be >= 1");
  if (n_classes < 2) throw BadInput("synth: n_classes must be >= 2");
  if (image_size < 16) throw BadInput("synth: image_size must be >= 16");
  if (min_shapes < 1 || max_shapes < min_shapes)
    throw BadInput("synth: need 1 <= min_shapes <= max_shapes");
  if (erode_iterations < 0 || seed_blur_radius < 0)
    throw BadInput("synth: corruption parameters must be >= 0");
  if (!(flip_fraction >= 0.0 && flip_fraction <= 0.5))
    throw BadInput("synth: flip_fraction must lie in [0, 0.5]");
}

namespace {

constexpr int kShapeKinds = 3;  // disc, box, triangle

// Saturated, well-separated palette; index = class / kShapeKinds.
std::array<std::uint8_t, 3> palette_color(int index) {
  static const std::array<std::uint8_t, 3> base[] = {
      {230, 60, 50},  {60, 200, 70},   {70, 90, 230},  {235, 200, 40},
      {200, 60, 220}, {40, 210, 210},  {245, 140, 30}, {150, 240, 60},
      {90, 40, 200},  {240, 90, 160},
  };
  return base[index % (sizeof(base) / sizeof(base[0]))];
}

struct Shape {
  int kind;  // 0 disc, 1 box, 2 triangle
  int cx, cy, r;
  std::array<std::uint8_t, 3> color;

  bool contains(int x, int y) const {
    switch (kind) {
      case 0:
        return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
      case 1:
        return std::abs(x - cx) <= r && std::abs(y - cy) <= r;
      default: {
        // upward triangle: apex at (cx, cy - r), base at cy + r
        if (y < cy - r || y > cy + r) return false;
        const double frac = static_cast<double>(y - (cy - r)) / (2 * r);
        return std::abs(x - cx) <= frac * r;
      }
    }
  }
};

void erode(BinaryMask& mask, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    BinaryMask next = mask;
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x) {
        if (!mask.at(x, y)) continue;
        const bool interior = x > 0 && x + 1 < mask.width && y > 0 && y + 1 < mask.height &&
                              mask.at(x - 1, y) && mask.at(x + 1, y) && mask.at(x, y - 1) &&
                              mask.at(x, y + 1);
        if (!interior) next.at(x, y) = 0;
      }
    mask = next;
  }
}

void box_blur(std::vector<float>& v, int w, int h, int radius) {
  if (radius <= 0) return;
  std::vector<float> tmp(v.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      float acc = 0;
      for (int s = x0; s <= x1; ++s) acc += v[static_cast<std::size_t>(y) * w + s];
      tmp[static_cast<std::size_t>(y) * w + x] = acc / (x1 - x0 + 1);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
      float acc = 0;
      for (int s = y0; s <= y1; ++s) acc += tmp[static_cast<std::size_t>(s) * w + x];
      v[static_cast<std::size_t>(y) * w + x] = acc / (y1 - y0 + 1);
    }
}

}  // namespace

DatasetManifest generate_synth_dataset(const SynthOptions& opts, const std::string& out_dir) {
  opts.validate();
  const fs::path root(out_dir);
  fs::create_directories(root / "images");
  fs::create_directories(root / "gt");
  fs::create_directories(root / "seeds");

  DatasetManifest manifest;
  Rng master(opts.seed);
  const int S = opts.image_size;

  for (int idx = 0; idx < opts.n_images; ++idx) {
    Rng rng = master.fork();
    Image img(S, S);
    BinaryMask gt(S, S);

    // Textured background: dim base color, smooth gradient, pixel noise.
    std::array<double, 3> base{}, gx{}, gy{};
    for (int c = 0; c < 3; ++c) {
      base[c] = rng.uniform(25, 110);
      gx[c] = rng.uniform(-0.8, 0.8);
      gy[c] = rng.uniform(-0.8, 0.8);
    }
    for (int y = 0; y < S; ++y)
      for (int x = 0; x < S; ++x)
        for (int c = 0; c < 3; ++c) {
          const double v = base[c] + gx[c] * x + gy[c] * y + rng.uniform(-10, 10);
          img.at(x, y)[c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }

    // Shapes; later ones draw over earlier ones.
    const int n_shapes = rng.uniform_int(opts.min_shapes, opts.max_shapes);
    std::set<int> label_set;
    std::vector<Shape> shapes;
    for (int s = 0; s < n_shapes; ++s) {
      const int cls = rng.uniform_int(0, opts.n_classes - 1);
      Shape sh;
      sh.kind = cls % kShapeKinds;
      sh.color = palette_color(cls / kShapeKinds);
      sh.r = rng.uniform_int(S / 10, S / 5);
      sh.cx = rng.uniform_int(sh.r + 1, S - sh.r - 2);
      sh.cy = rng.uniform_int(sh.r + 1, S - sh.r - 2);
      shapes.push_back(sh);
      label_set.insert(cls);
    }
    for (int y = 0; y < S; ++y)
      for (int x = 0; x < S; ++x)
        for (const Shape& sh : shapes)
          if (sh.contains(x, y)) {
            for (int c = 0; c < 3; ++c) {
              const double v = sh.color[c] + rng.uniform(-8, 8);
              img.at(x, y)[c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
            gt.at(x, y) = 1;
          }

    // Shape geometry keeps a background margin, and radii are >= 2 pixels.
    const std::size_t pos = gt.count_positive();
    if (pos == 0 || pos == gt.values.size())
      throw IoError("synthetic scene degenerated to a single class");

    // Seed annotation: eroded mask + flip noise + blur.
    BinaryMask eroded = gt;
    erode(eroded, opts.erode_iterations);
    std::vector<float> seed_map(eroded.values.size());
    for (std::size_t i = 0; i < seed_map.size(); ++i) {
      float v = eroded.values[i] ? 1.0f : 0.0f;
      if (rng.uniform() < opts.flip_fraction) v = 1.0f - v;
      seed_map[i] = v;
    }
    box_blur(seed_map, S, S, opts.seed_blur_radius);

    char name[32];
    std::snprintf(name, sizeof(name), "img_%04d.png", idx);
    const std::string image_path = (root / "images" / name).string();
    const std::string gt_path = (root / "gt" / name).string();
    const std::string seed_path = (root / "seeds" / name).string();

    save_image(img, image_path);
    SaliencyMap gt_map(S, S);
    for (std::size_t i = 0; i < gt_map.size(); ++i)
      gt_map.values[i] = gt.values[i] ? 1.0f : 0.0f;
    save_map(gt_map, gt_path);
    SaliencyMap seed(S, S);
    seed.values = seed_map;
    save_map(seed, seed_path);

    ManifestEntry entry;
    entry.image_path = image_path;
    entry.labels.assign(label_set.begin(), label_set.end());
    entry.annotation_path = seed_path;
    entry.gt_path = gt_path;
    manifest.entries.push_back(std::move(entry));
  }

  save_manifest(manifest, (root / "manifest.tsv").string());
  return manifest;
}

}  // namespace asmo::pipeline
