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

#include "asmo/seed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace asmo::seed {

void SeedConfig::validate() const {
  if (passes < 1) throw BadInput("seed.passes must be >= 1");
  if (post_blur_radius < 0) throw BadInput("seed.post_blur_radius must be >= 0");
}

namespace {

// Barrier cost of extending a path ending at `from` by pixel value v:
// the path's running max/min stretch to cover v.
struct PathState {
  float dist;
  float hi;
  float lo;
};

inline void relax(PathState& cur, const PathState& from, float v) {
  const float hi = std::max(from.hi, v);
  const float lo = std::min(from.lo, v);
  const float cost = hi - lo;
  if (cost < cur.dist) {
    cur.dist = cost;
    cur.hi = hi;
    cur.lo = lo;
  }
}

void box_blur(std::vector<float>& values, int width, int height, int radius) {
  if (radius <= 0) return;
  std::vector<float> tmp(values.size());
  // horizontal
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(width - 1, x + radius);
      float acc = 0.0f;
      for (int s = x0; s <= x1; ++s) acc += values[static_cast<std::size_t>(y) * width + s];
      tmp[static_cast<std::size_t>(y) * width + x] = acc / (x1 - x0 + 1);
    }
  }
  // vertical
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int y0 = std::max(0, y - radius), y1 = std::min(height - 1, y + radius);
      float acc = 0.0f;
      for (int s = y0; s <= y1; ++s) acc += tmp[static_cast<std::size_t>(s) * width + x];
      values[static_cast<std::size_t>(y) * width + x] = acc / (y1 - y0 + 1);
    }
  }
}

}  // namespace

std::vector<float> mbd_channel_distance(const std::vector<float>& plane, int width,
                                        int height, const std::vector<uint8_t>& is_seed,
                                        int passes) {
  if (plane.size() != static_cast<std::size_t>(width) * height ||
      is_seed.size() != plane.size())
    throw DimensionMismatch("mbd_channel_distance buffer sizes");

  std::vector<PathState> state(plane.size());
  for (std::size_t i = 0; i < plane.size(); ++i) {
    if (is_seed[i])
      state[i] = {0.0f, plane[i], plane[i]};
    else
      state[i] = {std::numeric_limits<float>::infinity(), plane[i], plane[i]};
  }

  const auto idx = [width](int x, int y) { return static_cast<std::size_t>(y) * width + x; };
  for (int pass = 0; pass < passes; ++pass) {
    // raster: consider left and top predecessors
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        PathState& cur = state[idx(x, y)];
        const float v = plane[idx(x, y)];
        if (x > 0) relax(cur, state[idx(x - 1, y)], v);
        if (y > 0) relax(cur, state[idx(x, y - 1)], v);
      }
    }
    // inverse raster: right and bottom predecessors
    for (int y = height - 1; y >= 0; --y) {
      for (int x = width - 1; x >= 0; --x) {
        PathState& cur = state[idx(x, y)];
        const float v = plane[idx(x, y)];
        if (x + 1 < width) relax(cur, state[idx(x + 1, y)], v);
        if (y + 1 < height) relax(cur, state[idx(x, y + 1)], v);
      }
    }
  }

  std::vector<float> dist(plane.size());
  for (std::size_t i = 0; i < plane.size(); ++i)
    dist[i] = std::isinf(state[i].dist) ? 1.0f : state[i].dist;
  return dist;
}

SaliencyMap mbd_seed_saliency(const Image& image, const SeedConfig& cfg) {
  cfg.validate();
  const int W = image.width, H = image.height;
  const std::size_t n = static_cast<std::size_t>(W) * H;

  std::vector<uint8_t> is_seed(n, 0);
  if (cfg.use_boundary_seeds) {
    for (int x = 0; x < W; ++x) {
      is_seed[x] = 1;
      is_seed[static_cast<std::size_t>(H - 1) * W + x] = 1;
    }
    for (int y = 0; y < H; ++y) {
      is_seed[static_cast<std::size_t>(y) * W] = 1;
      is_seed[static_cast<std::size_t>(y) * W + W - 1] = 1;
    }
  } else {
    is_seed[0] = 1;
    is_seed[W - 1] = 1;
    is_seed[static_cast<std::size_t>(H - 1) * W] = 1;
    is_seed[static_cast<std::size_t>(H - 1) * W + W - 1] = 1;
  }

  std::vector<float> total(n, 0.0f);
  std::vector<float> plane(n);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        plane[static_cast<std::size_t>(y) * W + x] = image.at(x, y)[c] / 255.0f;
    const std::vector<float> dist = mbd_channel_distance(plane, W, H, is_seed, cfg.passes);
    for (std::size_t i = 0; i < n; ++i) total[i] += dist[i];
  }

  box_blur(total, W, H, cfg.post_blur_radius);

  const auto [mn_it, mx_it] = std::minmax_element(total.begin(), total.end());
  const float mn = *mn_it, mx = *mx_it;
  SaliencyMap out(W, H);
  if (mx - mn > 0.0f) {
    const float inv = 1.0f / (mx - mn);
    for (std::size_t i = 0; i < n; ++i)
      out.values[i] = std::clamp((total[i] - mn) * inv, 0.0f, 1.0f);
  }
  return out;
}

}  // namespace asmo::seed
