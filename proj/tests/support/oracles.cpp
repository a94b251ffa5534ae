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

#include "support/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

namespace asmo::testsupport {

double oracle_mae(const SaliencyMap& a, const SaliencyMap& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += std::fabs(static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]));
  return sum / static_cast<double>(a.size());
}

OracleConfusion oracle_confusion(const SaliencyMap& pred, const BinaryMask& gt,
                                 double threshold) {
  OracleConfusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = static_cast<double>(pred.values[i]) > threshold;
    const bool g = gt.values[i] != 0;
    if (p && g) ++c.tp;
    else if (p && !g) ++c.fp;
    else if (!p && g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::vector<metrics::PrPoint> oracle_pr_curve(const std::vector<SaliencyMap>& preds,
                                              const std::vector<BinaryMask>& gts,
                                              int n_thresholds) {
  std::vector<metrics::PrPoint> curve(n_thresholds);
  for (int t = 0; t < n_thresholds; ++t) {
    curve[t].threshold = static_cast<double>(t) / (n_thresholds - 1);
    double psum = 0.0, rsum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const OracleConfusion c = oracle_confusion(preds[i], gts[i], curve[t].threshold);
      psum += (c.tp + c.fp) == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fp);
      rsum += static_cast<double>(c.tp) / (c.tp + c.fn);
    }
    curve[t].precision = psum / preds.size();
    curve[t].recall = rsum / preds.size();
  }
  return curve;
}

double oracle_max_f(const std::vector<metrics::PrPoint>& curve) {
  double best = 0.0;
  for (const auto& pt : curve) {
    const double denom = 0.3 * pt.precision + pt.recall;
    if (denom > 0.0)
      best = std::max(best, 1.3 * pt.precision * pt.recall / denom);
  }
  return best;
}

SaliencyMap oracle_mean_field(const Image& image, const SaliencyMap& map,
                              const crf::CrfParams& params) {
  const int W = map.width, H = map.height, n = W * H;
  const double eps = params.unary_clamp;

  std::vector<double> u_fg(n), u_bg(n);
  for (int i = 0; i < n; ++i) {
    const double p = std::clamp(static_cast<double>(map.values[i]), eps, 1.0 - eps);
    const double q = std::clamp(1.0 - static_cast<double>(map.values[i]), eps, 1.0 - eps);
    u_fg[i] = -std::log(p);
    u_bg[i] = -std::log(q);
  }

  // Dense pairwise kernel matrix (bilateral + spatial, self excluded).
  std::vector<double> kernel(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int xi = i % W, yi = i / W;
    const std::uint8_t* ci = image.at(xi, yi);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int xj = j % W, yj = j / W;
      const std::uint8_t* cj = image.at(xj, yj);
      const double dx = (xi - xj) / params.theta_alpha;
      const double dy = (yi - yj) / params.theta_alpha;
      double dc = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = (ci[c] - cj[c]) / params.theta_beta;
        dc += d * d;
      }
      const double bilateral = std::exp(-0.5 * (dx * dx + dy * dy + dc));
      const double sx = (xi - xj) / params.theta_gamma;
      const double sy = (yi - yj) / params.theta_gamma;
      const double spatial = std::exp(-0.5 * (sx * sx + sy * sy));
      kernel[static_cast<std::size_t>(i) * n + j] =
          params.w_bilateral * bilateral + params.w_spatial * spatial;
    }
  }

  std::vector<double> q_fg(n), q_bg(n);
  for (int i = 0; i < n; ++i) {
    const double efg = std::exp(-u_fg[i]);
    const double ebg = std::exp(-u_bg[i]);
    q_fg[i] = efg / (efg + ebg);
    q_bg[i] = ebg / (efg + ebg);
  }

  std::vector<double> next_fg(n), next_bg(n);
  for (int it = 0; it < params.iterations; ++it) {
    for (int i = 0; i < n; ++i) {
      double msg_fg = 0.0, msg_bg = 0.0;
      const double* row = kernel.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        msg_fg += row[j] * q_fg[j];
        msg_bg += row[j] * q_bg[j];
      }
      // Potts: each label is penalized by the other label's mass.
      const double e_fg = u_fg[i] + msg_bg;
      const double e_bg = u_bg[i] + msg_fg;
      const double shift = std::min(e_fg, e_bg);
      const double efg = std::exp(-(e_fg - shift));
      const double ebg = std::exp(-(e_bg - shift));
      next_fg[i] = efg / (efg + ebg);
      next_bg[i] = ebg / (efg + ebg);
    }
    q_fg.swap(next_fg);
    q_bg.swap(next_bg);
  }

  SaliencyMap out(W, H);
  for (int i = 0; i < n; ++i)
    out.values[i] = static_cast<float>(std::clamp(q_fg[i], 1e-15, 1.0 - 1e-15));
  return out;
}

std::vector<float> oracle_exact_mbd(const std::vector<float>& plane, int width, int height,
                                    const std::vector<std::uint8_t>& is_seed) {
  const std::size_t n = plane.size();
  std::vector<float> dist(n, std::numeric_limits<float>::infinity());

  // Collect the distinct values; candidate windows are value pairs.
  std::set<float> level_set(plane.begin(), plane.end());
  const std::vector<float> levels(level_set.begin(), level_set.end());

  std::vector<std::uint8_t> reach(n);
  std::vector<std::size_t> stack;
  for (float lo : levels) {
    for (float hi : levels) {
      if (hi < lo) continue;
      // Flood fill from seeds through pixels within [lo, hi].
      std::fill(reach.begin(), reach.end(), 0);
      stack.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (is_seed[i] && plane[i] >= lo && plane[i] <= hi) {
          reach[i] = 1;
          stack.push_back(i);
        }
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % width), y = static_cast<int>(i / width);
        const std::array<std::array<int, 2>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
        for (const auto& nb : nbrs) {
          if (nb[0] < 0 || nb[0] >= width || nb[1] < 0 || nb[1] >= height) continue;
          const std::size_t j = static_cast<std::size_t>(nb[1]) * width + nb[0];
          if (reach[j] || plane[j] < lo || plane[j] > hi) continue;
          reach[j] = 1;
          stack.push_back(j);
        }
      }
      const float window = hi - lo;
      for (std::size_t i = 0; i < n; ++i)
        if (reach[i] && window < dist[i]) dist[i] = window;
    }
  }
  return dist;
}

NaiveForwardResult naive_forward(const Image& image, const net::NetParams& params,
                                 const net::NetConfig& cfg) {
  const int W = image.width, H = image.height;
  const int stride_seq[4] = {2, 2, 2, 1};

  const auto resize = [](const std::vector<double>& src, int sw, int sh, int dw,
                         int dh) {
    std::vector<double> dst(static_cast<std::size_t>(dw) * dh);
    for (int y = 0; y < dh; ++y)
      for (int x = 0; x < dw; ++x) {
        const double fy = std::clamp((y + 0.5) * sh / dh - 0.5, 0.0, sh - 1.0);
        const double fx = std::clamp((x + 0.5) * sw / dw - 0.5, 0.0, sw - 1.0);
        const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
        const int y1 = std::min(y0 + 1, sh - 1), x1 = std::min(x0 + 1, sw - 1);
        const double wy = fy - y0, wx = fx - x0;
        dst[static_cast<std::size_t>(y) * dw + x] =
            (1 - wy) * ((1 - wx) * src[static_cast<std::size_t>(y0) * sw + x0] +
                        wx * src[static_cast<std::size_t>(y0) * sw + x1]) +
            wy * ((1 - wx) * src[static_cast<std::size_t>(y1) * sw + x0] +
                  wx * src[static_cast<std::size_t>(y1) * sw + x1]);
      }
    return dst;
  };

  NaiveForwardResult result;
  result.fused_prob.assign(static_cast<std::size_t>(W) * H, 0.0);
  std::vector<double> fused_logit(static_cast<std::size_t>(W) * H, 0.0);

  const int gw = (W + 7) / 8, gh = (H + 7) / 8;
  const int feat_ch = cfg.backbone_channels.back();
  const int K = static_cast<int>(cfg.scales.size()) * feat_ch;
  std::vector<double> concat(static_cast<std::size_t>(K) * gw * gh, 0.0);

  for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
    const double s = cfg.scales[si];
    const int sw = std::max(1, static_cast<int>(std::lround(W * s)));
    const int sh = std::max(1, static_cast<int>(std::lround(H * s)));
    const int pw = ((sw + 7) / 8) * 8, ph = ((sh + 7) / 8) * 8;

    // scaled + zero padded input planes
    std::vector<std::vector<double>> act(3);
    for (int c = 0; c < 3; ++c) {
      std::vector<double> plane(static_cast<std::size_t>(W) * H);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          plane[static_cast<std::size_t>(y) * W + x] = image.at(x, y)[c] / 255.0;
      const std::vector<double> scaled = resize(plane, W, H, sw, sh);
      act[c].assign(static_cast<std::size_t>(pw) * ph, 0.0);
      for (int y = 0; y < sh; ++y)
        for (int x = 0; x < sw; ++x)
          act[c][static_cast<std::size_t>(y) * pw + x] =
              scaled[static_cast<std::size_t>(y) * sw + x];
    }

    int cw = pw, ch = ph;
    for (std::size_t stage = 0; stage < params.backbone.size(); ++stage) {
      const int stride = stride_seq[stage];
      const int ow = (cw - 1) / stride + 1, oh = (ch - 1) / stride + 1;
      const int oc = params.backbone[stage].w.dims[0];
      const int ic = static_cast<int>(act.size());
      std::vector<std::vector<double>> next(oc);
      for (int co = 0; co < oc; ++co) {
        next[co].assign(static_cast<std::size_t>(ow) * oh, 0.0);
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < ow; ++ox) {
            double acc = params.backbone[stage].b.data[co];
            for (int cin = 0; cin < ic; ++cin)
              for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                  const int iy = oy * stride + ky - 1, ix = ox * stride + kx - 1;
                  if (iy < 0 || iy >= ch || ix < 0 || ix >= cw) continue;
                  acc += params.backbone[stage]
                             .w.data[((static_cast<std::size_t>(co) * ic + cin) * 3 + ky) * 3 +
                                     kx] *
                         act[cin][static_cast<std::size_t>(iy) * cw + ix];
                }
            next[co][static_cast<std::size_t>(oy) * ow + ox] = std::max(0.0, acc);
          }
      }
      act = std::move(next);
      cw = ow;
      ch = oh;
    }

    // saliency head
    std::vector<double> logits(2 * static_cast<std::size_t>(cw) * ch, 0.0);
    for (int c2 = 0; c2 < 2; ++c2)
      for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) {
          double acc = params.sal_b.data[c2];
          for (int cin = 0; cin < feat_ch; ++cin)
            acc += params.sal_w.data[static_cast<std::size_t>(c2) * feat_ch + cin] *
                   act[cin][static_cast<std::size_t>(y) * cw + x];
          logits[static_cast<std::size_t>(c2) * cw * ch + static_cast<std::size_t>(y) * cw +
                 x] = acc;
        }
    result.scale_logits.push_back(logits);

    std::vector<double> diff(static_cast<std::size_t>(cw) * ch);
    for (std::size_t i = 0; i < diff.size(); ++i)
      diff[i] = logits[static_cast<std::size_t>(cw) * ch + i] - logits[i];
    const std::vector<double> up = resize(diff, cw, ch, W, H);
    for (std::size_t i = 0; i < fused_logit.size(); ++i) fused_logit[i] += up[i];

    for (int cin = 0; cin < feat_ch; ++cin) {
      std::vector<double> plane(act[cin]);
      const std::vector<double> rs = resize(plane, cw, ch, gw, gh);
      std::copy(rs.begin(), rs.end(),
                concat.begin() + (si * feat_ch + cin) * static_cast<std::size_t>(gw) * gh);
    }
  }

  for (std::size_t i = 0; i < fused_logit.size(); ++i)
    result.fused_prob[i] = 1.0 / (1.0 + std::exp(-fused_logit[i]));

  result.class_scores.assign(cfg.n_classes, 0.0);
  for (int c = 0; c < cfg.n_classes; ++c) {
    double acc = params.cls_b.data[c];
    for (int k = 0; k < K; ++k) {
      double mean = 0.0;
      const double* plane = concat.data() + static_cast<std::size_t>(k) * gw * gh;
      for (int i = 0; i < gw * gh; ++i) mean += plane[i];
      mean /= gw * gh;
      acc += params.cls_w.data[static_cast<std::size_t>(c) * K + k] * mean;
    }
    result.class_scores[c] = acc;
  }
  return result;
}

Image random_image(Rng& rng, int width, int height) {
  Image img(width, height);
  for (auto& px : img.pixels) px = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return img;
}

SaliencyMap random_map(Rng& rng, int width, int height, float lo, float hi) {
  SaliencyMap map(width, height);
  for (auto& v : map.values) v = static_cast<float>(rng.uniform(lo, hi));
  return map;
}

BinaryMask random_mask(Rng& rng, int width, int height) {
  BinaryMask mask(width, height);
  for (auto& v : mask.values) v = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
  return mask;
}

Image cluster_image(Rng& rng, int width, int height, int color_noise) {
  Image img(width, height);
  const int ncl = rng.uniform_int(2, 3);
  std::vector<std::array<int, 3>> colors(ncl);
  for (auto& c : colors)
    for (auto& v : c) v = rng.uniform_int(0, 255);
  const int split = rng.uniform_int(1, width - 1);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      int cl = x < split ? 0 : 1;
      if (ncl == 3 && x >= 1 && x <= 3 && y >= height / 2) cl = 2;
      for (int c = 0; c < 3; ++c) {
        const int v = colors[cl][c] + rng.uniform_int(-color_noise, color_noise);
        img.at(x, y)[c] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
  return img;
}

}  // namespace asmo::testsupport
