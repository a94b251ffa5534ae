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

#include "asmo/densecrf.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "asmo/permutohedral.hpp"

namespace asmo::crf {

void CrfParams::validate() const {
  if (iterations < 1) throw BadInput("crf.iterations must be >= 1");
  if (w_bilateral < 0 || w_spatial < 0) throw BadInput("crf kernel weights must be >= 0");
  if (theta_alpha <= 0 || theta_beta <= 0 || theta_gamma <= 0)
    throw BadInput("crf kernel stddevs must be > 0");
  if (!(unary_clamp > 0 && unary_clamp < 0.5))
    throw BadInput("crf.unary_clamp must lie in (0, 0.5)");
}

UnaryPotentials build_unary(const SaliencyMap& map, const CrfParams& params) {
  params.validate();
  const double eps = params.unary_clamp;
  UnaryPotentials u;
  u.width = map.width;
  u.height = map.height;
  u.u_fg.resize(map.size());
  u.u_bg.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double p = std::clamp(static_cast<double>(map.values[i]), eps, 1.0 - eps);
    const double q = std::clamp(1.0 - static_cast<double>(map.values[i]), eps, 1.0 - eps);
    u.u_fg[i] = -std::log(p);
    u.u_bg[i] = -std::log(q);
  }
  return u;
}

namespace {

// Separable evaluation of the 2-d spatial Gaussian on the pixel grid,
// exact up to floating-point rounding: one pass over rows, one over
// columns, with the full tap table. Much faster than a lattice for this
// kernel and error-free.
class SeparableSpatial {
 public:
  SeparableSpatial(int width, int height, double theta)
      : width_(width), height_(height) {
    const int longest = std::max(width, height);
    taps_.resize(longest);
    for (int t = 0; t < longest; ++t) {
      const double r = t / theta;
      taps_[t] = std::exp(-0.5 * r * r);
    }
  }

  // q: interleaved two-channel field; out gets the filtered field.
  void filter(const std::vector<double>& q, std::vector<double>& out) const {
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    tmp_.assign(n * 2, 0.0);
    // rows
    for (int y = 0; y < height_; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * width_;
      for (int x = 0; x < width_; ++x) {
        double acc0 = 0.0, acc1 = 0.0;
        for (int s = 0; s < width_; ++s) {
          const double w = taps_[std::abs(x - s)];
          acc0 += w * q[(row + s) * 2];
          acc1 += w * q[(row + s) * 2 + 1];
        }
        tmp_[(row + x) * 2] = acc0;
        tmp_[(row + x) * 2 + 1] = acc1;
      }
    }
    // columns
    for (int x = 0; x < width_; ++x) {
      for (int y = 0; y < height_; ++y) {
        double acc0 = 0.0, acc1 = 0.0;
        for (int s = 0; s < height_; ++s) {
          const double w = taps_[std::abs(y - s)];
          acc0 += w * tmp_[(static_cast<std::size_t>(s) * width_ + x) * 2];
          acc1 += w * tmp_[(static_cast<std::size_t>(s) * width_ + x) * 2 + 1];
        }
        out[(static_cast<std::size_t>(y) * width_ + x) * 2] = acc0;
        out[(static_cast<std::size_t>(y) * width_ + x) * 2 + 1] = acc1;
      }
    }
  }

 private:
  int width_;
  int height_;
  std::vector<double> taps_;
  mutable std::vector<double> tmp_;
};

}  // namespace

SaliencyMap mean_field_refine(const Image& image, const SaliencyMap& map,
                              const CrfParams& params, PairwiseBackend backend) {
  params.validate();
  require_same_size(image.width, image.height, map.width, map.height, "mean_field_refine");
  const int n = map.width * map.height;

  const UnaryPotentials unary = build_unary(map, params);

  std::vector<double> bilateral_pos(static_cast<std::size_t>(n) * 5);
  std::vector<double> spatial_pos;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * map.width + x;
      const std::uint8_t* px = image.at(x, y);
      bilateral_pos[i * 5 + 0] = x / params.theta_alpha;
      bilateral_pos[i * 5 + 1] = y / params.theta_alpha;
      bilateral_pos[i * 5 + 2] = px[0] / params.theta_beta;
      bilateral_pos[i * 5 + 3] = px[1] / params.theta_beta;
      bilateral_pos[i * 5 + 4] = px[2] / params.theta_beta;
    }
  }

  // The accelerated path routes the five-dimensional bilateral kernel
  // through the permutohedral lattice; the two-dimensional smoothness
  // kernel is separable over the pixel grid and computed exactly instead.
  std::unique_ptr<PermutohedralLattice> bilateral_lattice;
  std::unique_ptr<SeparableSpatial> spatial_exact;
  if (backend == PairwiseBackend::kLattice) {
    bilateral_lattice = std::make_unique<PermutohedralLattice>(bilateral_pos, n, 5);
    spatial_exact = std::make_unique<SeparableSpatial>(map.width, map.height,
                                                       params.theta_gamma);
  } else {
    spatial_pos.resize(static_cast<std::size_t>(n) * 2);
    for (int y = 0; y < map.height; ++y) {
      for (int x = 0; x < map.width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * map.width + x;
        spatial_pos[i * 2 + 0] = x / params.theta_gamma;
        spatial_pos[i * 2 + 1] = y / params.theta_gamma;
      }
    }
  }

  // Interleaved (bg, fg) marginals; initialized from the unaries.
  std::vector<double> q(static_cast<std::size_t>(n) * 2);
  for (int i = 0; i < n; ++i) {
    const double ebg = std::exp(-unary.u_bg[i]);
    const double efg = std::exp(-unary.u_fg[i]);
    const double sum = std::max(ebg + efg, 1e-20);
    q[2 * i] = ebg / sum;
    q[2 * i + 1] = efg / sum;
  }

  std::vector<double> msg_bilateral(q.size()), msg_spatial(q.size());
  for (int it = 0; it < params.iterations; ++it) {
    if (backend == PairwiseBackend::kLattice) {
      bilateral_lattice->filter(q.data(), msg_bilateral.data(), 2);
      spatial_exact->filter(q, msg_spatial);
    } else {
      msg_bilateral = brute_force_gaussian_filter(bilateral_pos, n, 5, q, 2);
      msg_spatial = brute_force_gaussian_filter(spatial_pos, n, 2, q, 2);
    }
    // The pairwise sum excludes i = j; the filters include it.
    for (std::size_t i = 0; i < q.size(); ++i) {
      msg_bilateral[i] -= q[i];
      msg_spatial[i] -= q[i];
    }
    for (int i = 0; i < n; ++i) {
      // Potts compatibility: label l is penalized by the other label's mass.
      const double pair_bg = params.w_bilateral * msg_bilateral[2 * i + 1] +
                             params.w_spatial * msg_spatial[2 * i + 1];
      const double pair_fg = params.w_bilateral * msg_bilateral[2 * i] +
                             params.w_spatial * msg_spatial[2 * i];
      const double e_bg = unary.u_bg[i] + pair_bg;
      const double e_fg = unary.u_fg[i] + pair_fg;
      const double shift = std::min(e_bg, e_fg);
      const double ebg = std::exp(-(e_bg - shift));
      const double efg = std::exp(-(e_fg - shift));
      const double sum = std::max(ebg + efg, 1e-20);
      q[2 * i] = ebg / sum;
      q[2 * i + 1] = efg / sum;
    }
  }

  SaliencyMap out(map.width, map.height);
  for (int i = 0; i < n; ++i) {
    // Keep the reported marginal strictly inside (0,1) even when one
    // label's weight underflowed.
    const double fg = std::clamp(q[2 * i + 1], 1e-15, 1.0 - 1e-15);
    out.values[i] = static_cast<float>(fg);
  }
  return out;
}

}  // namespace asmo::crf
