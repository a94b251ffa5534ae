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

#include "asmo/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asmo/kernels.hpp"

namespace asmo::net {

namespace {

constexpr double kLossClamp = 1e-7;

struct PlaneDims {
  int w = 0, h = 0;
  std::size_t plane() const { return static_cast<std::size_t>(w) * h; }
};

// ---- bilinear resize on double planes (align-corners-false) -------------

void resize_plane(const double* src, int sw, int sh, double* dst, int dw, int dh) {
  if (sw == dw && sh == dh) {
    std::copy(src, src + static_cast<std::size_t>(sw) * sh, dst);
    return;
  }
  const double fx_scale = static_cast<double>(sw) / dw;
  const double fy_scale = static_cast<double>(sh) / dh;
  for (int y = 0; y < dh; ++y) {
    const double fy =
        std::max(0.0, std::min((y + 0.5) * fy_scale - 0.5, static_cast<double>(sh - 1)));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double wy = fy - y0;
    for (int x = 0; x < dw; ++x) {
      const double fx =
          std::max(0.0, std::min((x + 0.5) * fx_scale - 0.5, static_cast<double>(sw - 1)));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, sw - 1);
      const double wx = fx - x0;
      dst[static_cast<std::size_t>(y) * dw + x] =
          (1 - wy) * ((1 - wx) * src[static_cast<std::size_t>(y0) * sw + x0] +
                      wx * src[static_cast<std::size_t>(y0) * sw + x1]) +
          wy * ((1 - wx) * src[static_cast<std::size_t>(y1) * sw + x0] +
                wx * src[static_cast<std::size_t>(y1) * sw + x1]);
    }
  }
}

// Transpose of resize_plane: scatters output gradients back through the
// same four-tap weights.
void resize_plane_backward(const double* dout, int dw, int dh, double* dsrc, int sw, int sh) {
  if (sw == dw && sh == dh) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(sw) * sh; ++i) dsrc[i] += dout[i];
    return;
  }
  const double fx_scale = static_cast<double>(sw) / dw;
  const double fy_scale = static_cast<double>(sh) / dh;
  for (int y = 0; y < dh; ++y) {
    const double fy =
        std::max(0.0, std::min((y + 0.5) * fy_scale - 0.5, static_cast<double>(sh - 1)));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double wy = fy - y0;
    for (int x = 0; x < dw; ++x) {
      const double fx =
          std::max(0.0, std::min((x + 0.5) * fx_scale - 0.5, static_cast<double>(sw - 1)));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, sw - 1);
      const double wx = fx - x0;
      const double g = dout[static_cast<std::size_t>(y) * dw + x];
      dsrc[static_cast<std::size_t>(y0) * sw + x0] += (1 - wy) * (1 - wx) * g;
      dsrc[static_cast<std::size_t>(y0) * sw + x1] += (1 - wy) * wx * g;
      dsrc[static_cast<std::size_t>(y1) * sw + x0] += wy * (1 - wx) * g;
      dsrc[static_cast<std::size_t>(y1) * sw + x1] += wy * wx * g;
    }
  }
}

// ---- 3x3 convolution, padding 1, stride 1 or 2 ---------------------------

int conv_out_dim(int in, int stride) { return (in - 1) / stride + 1; }

// out[co] = b[co] + sum_{ci,ky,kx} w[co][ci][ky][kx] * in[ci] shifted.
// The inner loops run along output rows so the kernel table's axpy
// variants carry the arithmetic.
void conv3x3_forward(const double* in, int ci_n, int ih, int iw, const Tensor& w,
                     const Tensor& b, int stride, double* out, int oh, int ow) {
  const auto& k = kern::active();
  const std::size_t in_plane = static_cast<std::size_t>(ih) * iw;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
  for (int co = 0; co < w.dims[0]; ++co) {
    double* out_ch = out + co * out_plane;
    std::fill(out_ch, out_ch + out_plane, b.data[co]);
    for (int ci = 0; ci < ci_n; ++ci) {
      const double* in_ch = in + ci * in_plane;
      const double* wk =
          w.ptr() + ((static_cast<std::size_t>(co) * ci_n + ci) * 9);
      for (int ky = 0; ky < 3; ++ky) {
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - 1;
          if (iy < 0 || iy >= ih) continue;
          double* orow = out_ch + static_cast<std::size_t>(oy) * ow;
          const double* irow = in_ch + static_cast<std::size_t>(iy) * iw;
          for (int kx = 0; kx < 3; ++kx) {
            const double wv = wk[ky * 3 + kx];
            if (wv == 0.0) continue;
            // valid ox range: 0 <= ox*stride + kx - 1 < iw
            int ox0 = 0;
            while (ox0 * stride + kx - 1 < 0) ++ox0;
            int ox1 = ow;  // exclusive
            while (ox1 > ox0 && (ox1 - 1) * stride + kx - 1 >= iw) --ox1;
            if (ox1 <= ox0) continue;
            const int count = ox1 - ox0;
            const double* src = irow + (static_cast<std::size_t>(ox0) * stride + kx - 1);
            if (stride == 1)
              k.axpy_f64(orow + ox0, wv, src, count);
            else
              k.axpy_s2_f64(orow + ox0, wv, src, count);
          }
        }
      }
    }
  }
}

// Gradients w.r.t. input, weights and bias from dL/dout.
void conv3x3_backward(const double* in, int ci_n, int ih, int iw, const Tensor& w, int stride,
                      const double* dout, int oh, int ow, double* din, Tensor& dw,
                      Tensor& db) {
  const auto& k = kern::active();
  const std::size_t in_plane = static_cast<std::size_t>(ih) * iw;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
  for (int co = 0; co < w.dims[0]; ++co) {
    const double* dout_ch = dout + co * out_plane;
    double bias_grad = 0.0;
    for (std::size_t i = 0; i < out_plane; ++i) bias_grad += dout_ch[i];
    db.data[co] += bias_grad;
    for (int ci = 0; ci < ci_n; ++ci) {
      const double* in_ch = in + ci * in_plane;
      double* din_ch = din ? din + ci * in_plane : nullptr;
      const double* wk = w.ptr() + ((static_cast<std::size_t>(co) * ci_n + ci) * 9);
      double* dwk = dw.ptr() + ((static_cast<std::size_t>(co) * ci_n + ci) * 9);
      for (int ky = 0; ky < 3; ++ky) {
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - 1;
          if (iy < 0 || iy >= ih) continue;
          const double* drow = dout_ch + static_cast<std::size_t>(oy) * ow;
          const double* irow = in_ch + static_cast<std::size_t>(iy) * iw;
          double* dirow = din_ch ? din_ch + static_cast<std::size_t>(iy) * iw : nullptr;
          for (int kx = 0; kx < 3; ++kx) {
            int ox0 = 0;
            while (ox0 * stride + kx - 1 < 0) ++ox0;
            int ox1 = ow;
            while (ox1 > ox0 && (ox1 - 1) * stride + kx - 1 >= iw) --ox1;
            if (ox1 <= ox0) continue;
            const int count = ox1 - ox0;
            const std::size_t ioff = static_cast<std::size_t>(ox0) * stride + kx - 1;
            if (stride == 1) {
              dwk[ky * 3 + kx] += k.dot_f64(drow + ox0, irow + ioff, count);
              if (dirow) k.axpy_f64(dirow + ioff, wk[ky * 3 + kx], drow + ox0, count);
            } else {
              dwk[ky * 3 + kx] += k.dot_s2_f64(drow + ox0, irow + ioff, count);
              if (dirow)
                k.axpy_scatter2_f64(dirow + ioff, wk[ky * 3 + kx], drow + ox0, count);
            }
          }
        }
      }
    }
  }
}

// ---- per-image forward state ---------------------------------------------

struct ScaleTrace {
  PlaneDims input;              // padded scaled input
  std::vector<double> x0;       // 3 input planes
  std::vector<std::vector<double>> pre;   // pre-activation per stage
  std::vector<std::vector<double>> act;   // post-activation per stage
  std::vector<PlaneDims> stage_dims;
  PlaneDims grid;               // 1/8 grid of this scale
  std::vector<double> logits;   // 2 planes on grid (saliency head)
  std::vector<double> diff_up;  // fg-bg logit upsampled to input resolution
  std::vector<double> feat_resized;  // features on the full-scale grid
};

struct Trace {
  int width = 0, height = 0;   // original input size
  PlaneDims full_grid;         // full-scale 1/8 grid
  std::vector<ScaleTrace> scales;
  std::vector<double> fused_logit;  // width*height
  std::vector<double> fused_prob;   // width*height
  std::vector<double> gap;          // concat_channels
  std::vector<double> scores;       // n_classes
  std::vector<double> concat;       // concat_channels planes on full grid
};

int pad_to_stride(int v, int stride) { return ((v + stride - 1) / stride) * stride; }

int scaled_dim(int v, double s) {
  return std::max(1, static_cast<int>(std::lround(v * s)));
}

void run_forward(const Image& image, const NetParams& params, const NetConfig& cfg,
                 Trace& tr) {
  cfg.validate();
  params.validate_against(cfg);
  const int W = image.width, H = image.height;
  tr.width = W;
  tr.height = H;
  tr.full_grid = {pad_to_stride(W, cfg.feature_stride) / cfg.feature_stride,
                  pad_to_stride(H, cfg.feature_stride) / cfg.feature_stride};

  // Input as three [0,1] planes at original resolution.
  std::vector<double> base(static_cast<std::size_t>(W) * H * 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        base[c * static_cast<std::size_t>(W) * H + static_cast<std::size_t>(y) * W + x] =
            image.at(x, y)[c] / 255.0;

  const int n_scales = static_cast<int>(cfg.scales.size());
  const int feat_ch = cfg.feature_channels();
  tr.scales.resize(n_scales);
  tr.fused_logit.assign(static_cast<std::size_t>(W) * H, 0.0);

  for (int si = 0; si < n_scales; ++si) {
    ScaleTrace& st = tr.scales[si];
    const double s = cfg.scales[si];
    const int sw = scaled_dim(W, s), sh = scaled_dim(H, s);
    const int pw = pad_to_stride(sw, cfg.feature_stride);
    const int ph = pad_to_stride(sh, cfg.feature_stride);
    st.input = {pw, ph};

    // Scale then zero-pad on the right/bottom edge.
    st.x0.assign(static_cast<std::size_t>(pw) * ph * 3, 0.0);
    std::vector<double> scaled(static_cast<std::size_t>(sw) * sh);
    for (int c = 0; c < 3; ++c) {
      resize_plane(base.data() + c * static_cast<std::size_t>(W) * H, W, H, scaled.data(),
                   sw, sh);
      for (int y = 0; y < sh; ++y)
        std::copy(scaled.data() + static_cast<std::size_t>(y) * sw,
                  scaled.data() + static_cast<std::size_t>(y + 1) * sw,
                  st.x0.data() + c * static_cast<std::size_t>(pw) * ph +
                      static_cast<std::size_t>(y) * pw);
    }

    // Backbone stages with rectifier nonlinearity.
    const int n_stages = static_cast<int>(params.backbone.size());
    st.pre.resize(n_stages);
    st.act.resize(n_stages);
    st.stage_dims.resize(n_stages);
    const double* cur = st.x0.data();
    int cur_ch = 3, cur_w = pw, cur_h = ph;
    for (int stage = 0; stage < n_stages; ++stage) {
      const int stride = kBackboneStrides[stage];
      const int ow = conv_out_dim(cur_w, stride), oh = conv_out_dim(cur_h, stride);
      const int oc = params.backbone[stage].w.dims[0];
      st.stage_dims[stage] = {ow, oh};
      st.pre[stage].assign(static_cast<std::size_t>(oc) * ow * oh, 0.0);
      conv3x3_forward(cur, cur_ch, cur_h, cur_w, params.backbone[stage].w,
                      params.backbone[stage].b, stride, st.pre[stage].data(), oh, ow);
      st.act[stage] = st.pre[stage];
      for (double& v : st.act[stage]) v = v > 0.0 ? v : 0.0;
      cur = st.act[stage].data();
      cur_ch = oc;
      cur_w = ow;
      cur_h = oh;
    }
    st.grid = {cur_w, cur_h};

    // 1x1 two-channel saliency head.
    const std::size_t grid_plane = st.grid.plane();
    st.logits.assign(grid_plane * 2, 0.0);
    for (int ch = 0; ch < 2; ++ch) {
      double* out = st.logits.data() + ch * grid_plane;
      std::fill(out, out + grid_plane, params.sal_b.data[ch]);
      for (int ci = 0; ci < feat_ch; ++ci)
        kern::active().axpy_f64(out, params.sal_w.data[ch * feat_ch + ci],
                                cur + ci * grid_plane, grid_plane);
    }

    // Foreground-minus-background logit, upsampled to input resolution.
    std::vector<double> diff(grid_plane);
    for (std::size_t i = 0; i < grid_plane; ++i)
      diff[i] = st.logits[grid_plane + i] - st.logits[i];
    st.diff_up.assign(static_cast<std::size_t>(W) * H, 0.0);
    resize_plane(diff.data(), st.grid.w, st.grid.h, st.diff_up.data(), W, H);
    for (std::size_t i = 0; i < tr.fused_logit.size(); ++i)
      tr.fused_logit[i] += st.diff_up[i];

    // Features on the full-scale grid for the classifier.
    st.feat_resized.assign(static_cast<std::size_t>(feat_ch) * tr.full_grid.plane(), 0.0);
    for (int ci = 0; ci < feat_ch; ++ci)
      resize_plane(cur + ci * grid_plane, st.grid.w, st.grid.h,
                   st.feat_resized.data() + ci * tr.full_grid.plane(), tr.full_grid.w,
                   tr.full_grid.h);
  }

  tr.fused_prob.resize(tr.fused_logit.size());
  for (std::size_t i = 0; i < tr.fused_logit.size(); ++i)
    tr.fused_prob[i] = 1.0 / (1.0 + std::exp(-tr.fused_logit[i]));

  // Concatenate per-scale features, pool, classify.
  const int K = cfg.concat_channels();
  const std::size_t full_plane = tr.full_grid.plane();
  tr.concat.assign(static_cast<std::size_t>(K) * full_plane, 0.0);
  for (int si = 0; si < n_scales; ++si)
    std::copy(tr.scales[si].feat_resized.begin(), tr.scales[si].feat_resized.end(),
              tr.concat.begin() + static_cast<std::size_t>(si) * feat_ch * full_plane);
  tr.gap.assign(K, 0.0);
  for (int k = 0; k < K; ++k) {
    const double* plane = tr.concat.data() + static_cast<std::size_t>(k) * full_plane;
    tr.gap[k] = std::accumulate(plane, plane + full_plane, 0.0) /
                static_cast<double>(full_plane);
  }
  tr.scores.assign(cfg.n_classes, 0.0);
  for (int c = 0; c < cfg.n_classes; ++c)
    tr.scores[c] = params.cls_b.data[c] +
                   kern::active().dot_f64(params.cls_w.ptr() + static_cast<std::size_t>(c) * K,
                                          tr.gap.data(), K);
}

// Class-balanced cross entropy on a double probability plane; also hands
// back dL/dlogit when `dlogit` is non-null.
LossBreakdown balanced_bce(const double* p, const BinaryMask& g, double* dlogit) {
  LossBreakdown lb;
  lb.n_total = g.values.size();
  lb.n_pos = g.count_positive();
  lb.n_neg = lb.n_total - lb.n_pos;
  lb.beta = static_cast<double>(lb.n_neg) / static_cast<double>(lb.n_total);
  double loss = 0.0;
  for (std::size_t i = 0; i < lb.n_total; ++i) {
    const double pc = std::clamp(p[i], kLossClamp, 1.0 - kLossClamp);
    if (g.values[i]) {
      loss -= lb.beta * std::log(pc);
      if (dlogit) dlogit[i] = (p[i] > kLossClamp && p[i] < 1.0 - kLossClamp)
                                  ? -lb.beta * (1.0 - p[i])
                                  : 0.0;
    } else {
      loss -= (1.0 - lb.beta) * std::log(1.0 - pc);
      if (dlogit) dlogit[i] = (p[i] > kLossClamp && p[i] < 1.0 - kLossClamp)
                                  ? (1.0 - lb.beta) * p[i]
                                  : 0.0;
    }
  }
  lb.total = loss;
  return lb;
}

void fill_outputs(const Trace& tr, const NetConfig& cfg, ForwardOutputs& out) {
  out.input_width = tr.width;
  out.input_height = tr.height;
  out.scale_logits.clear();
  for (const auto& st : tr.scales) {
    Tensor t({2, st.grid.h, st.grid.w});
    t.data = st.logits;
    out.scale_logits.push_back(std::move(t));
  }
  out.fused_prob = SaliencyMap(tr.width, tr.height);
  for (std::size_t i = 0; i < tr.fused_prob.size(); ++i)
    out.fused_prob.values[i] = static_cast<float>(
        std::clamp(tr.fused_prob[i], kLossClamp, 1.0 - kLossClamp));
  out.class_scores = tr.scores;
  out.concat_features = Tensor({cfg.concat_channels(), tr.full_grid.h, tr.full_grid.w});
  out.concat_features.data = tr.concat;
  out.gap = tr.gap;
}

}  // namespace

// ---- configuration and parameters ----------------------------------------

void NetConfig::validate() const {
  if (scales.empty()) throw ShapeError("net.scales must be non-empty");
  for (double s : scales)
    if (!(s > 0.0 && s <= 1.0)) throw ShapeError("net scales must lie in (0, 1]");
  if (backbone_channels.size() != 4)
    throw ShapeError("backbone expects exactly 4 stages of channels");
  for (int c : backbone_channels)
    if (c < 1) throw ShapeError("backbone channel counts must be >= 1");
  if (n_classes < 2) throw ShapeError("n_classes must be >= 2");
  int stride = 1;
  for (int s : kBackboneStrides) stride *= s;
  if (feature_stride != stride)
    throw ShapeError("feature_stride must equal the backbone stride product (8)");
}

void NetParams::validate_against(const NetConfig& cfg) const {
  if (backbone.size() != cfg.backbone_channels.size())
    throw ShapeError("backbone stage count mismatch");
  int in_ch = 3;
  for (std::size_t i = 0; i < backbone.size(); ++i) {
    const auto& st = backbone[i];
    const std::vector<int> want{cfg.backbone_channels[i], in_ch, 3, 3};
    if (st.w.dims != want)
      throw ShapeError("backbone stage " + std::to_string(i) + " kernel is " +
                       st.w.shape_str());
    if (st.b.dims != std::vector<int>{cfg.backbone_channels[i]})
      throw ShapeError("backbone stage " + std::to_string(i) + " bias shape");
    in_ch = cfg.backbone_channels[i];
  }
  if (sal_w.dims != std::vector<int>{2, cfg.feature_channels()})
    throw ShapeError("saliency head weights are " + sal_w.shape_str());
  if (sal_b.dims != std::vector<int>{2}) throw ShapeError("saliency head bias shape");
  if (cls_w.dims != std::vector<int>{cfg.n_classes, cfg.concat_channels()})
    throw ShapeError("classifier weights are " + cls_w.shape_str());
  if (cls_b.dims != std::vector<int>{cfg.n_classes}) throw ShapeError("classifier bias shape");
}

std::size_t NetParams::parameter_count() const {
  std::size_t n = sal_w.numel() + sal_b.numel() + cls_w.numel() + cls_b.numel();
  for (const auto& st : backbone) n += st.w.numel() + st.b.numel();
  return n;
}

namespace {

void glorot_fill(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
}

}  // namespace

NetParams init_params(const NetConfig& cfg, Rng& rng) {
  cfg.validate();
  NetParams p;
  int in_ch = 3;
  for (std::size_t i = 0; i < cfg.backbone_channels.size(); ++i) {
    ConvStage st;
    st.w = Tensor({cfg.backbone_channels[i], in_ch, 3, 3});
    st.b = Tensor({cfg.backbone_channels[i]});
    glorot_fill(st.w, in_ch * 9, cfg.backbone_channels[i] * 9, rng);
    p.backbone.push_back(std::move(st));
    in_ch = cfg.backbone_channels[i];
  }
  p.sal_w = Tensor({2, cfg.feature_channels()});
  p.sal_b = Tensor({2});
  glorot_fill(p.sal_w, cfg.feature_channels(), 2, rng);
  p.cls_w = Tensor({cfg.n_classes, cfg.concat_channels()});
  p.cls_b = Tensor({cfg.n_classes});
  glorot_fill(p.cls_w, cfg.concat_channels(), cfg.n_classes, rng);
  return p;
}

// ---- public forward and activation maps ----------------------------------

ForwardOutputs forward(const Image& image, const NetParams& params, const NetConfig& cfg) {
  Trace tr;
  run_forward(image, params, cfg, tr);
  ForwardOutputs out;
  fill_outputs(tr, cfg, out);
  return out;
}

Tensor compute_cam_raw(const ForwardOutputs& outputs, const NetParams& params, int c) {
  const int C = params.cls_w.dims[0];
  const int K = params.cls_w.dims[1];
  if (c < 0 || c >= C) throw IndexError("class index " + std::to_string(c) + " out of range");
  const int gh = outputs.concat_features.dims[1];
  const int gw = outputs.concat_features.dims[2];
  Tensor raw({gh, gw});
  const std::size_t plane = static_cast<std::size_t>(gh) * gw;
  for (int k = 0; k < K; ++k)
    kern::active().axpy_f64(raw.ptr(), params.cls_w.data[static_cast<std::size_t>(c) * K + k],
                            outputs.concat_features.ptr() + static_cast<std::size_t>(k) * plane,
                            plane);
  return raw;
}

SaliencyMap compute_cam(const ForwardOutputs& outputs, const NetParams& params, int c) {
  const Tensor raw = compute_cam_raw(outputs, params, c);
  std::vector<double> up(static_cast<std::size_t>(outputs.input_width) *
                         outputs.input_height);
  resize_plane(raw.ptr(), raw.dims[1], raw.dims[0], up.data(), outputs.input_width,
               outputs.input_height);
  const auto [mn_it, mx_it] = std::minmax_element(up.begin(), up.end());
  const double mn = *mn_it, mx = *mx_it;
  SaliencyMap map(outputs.input_width, outputs.input_height);
  if (mx - mn > 0.0) {
    const double inv = 1.0 / (mx - mn);
    for (std::size_t i = 0; i < up.size(); ++i)
      map.values[i] = static_cast<float>(std::clamp((up[i] - mn) * inv, 0.0, 1.0));
  }
  return map;
}

SaliencyMap top_k_cam_mean(const ForwardOutputs& outputs, const NetParams& params, int k) {
  const int C = static_cast<int>(outputs.class_scores.size());
  if (k < 1 || k > C) throw IndexError("top-k count " + std::to_string(k) + " out of range");
  std::vector<int> order(C);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return outputs.class_scores[a] > outputs.class_scores[b];
  });
  SaliencyMap mean(outputs.input_width, outputs.input_height);
  std::vector<double> acc(mean.size(), 0.0);
  for (int i = 0; i < k; ++i) {
    const SaliencyMap cam = compute_cam(outputs, params, order[i]);
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += cam.values[p];
  }
  for (std::size_t p = 0; p < acc.size(); ++p)
    mean.values[p] = static_cast<float>(acc[p] / k);
  return mean;
}

// ---- losses ---------------------------------------------------------------

LossBreakdown saliency_loss(const SaliencyMap& pred_prob, const BinaryMask& g) {
  require_same_size(pred_prob.width, pred_prob.height, g.width, g.height, "saliency_loss");
  std::vector<double> p(pred_prob.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = pred_prob.values[i];
  return balanced_bce(p.data(), g, nullptr);
}

double classification_loss(const std::vector<double>& scores,
                           const std::vector<double>& target) {
  if (scores.size() != target.size())
    throw DimensionMismatch("classification_loss: score/target lengths differ");
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = scores[i] - target[i];
    loss += d * d;
  }
  return 0.5 * loss;
}

std::vector<double> classification_target(const std::vector<int>& labels, int n_classes) {
  std::vector<double> t(n_classes, 0.0);
  if (labels.empty()) return t;
  for (int l : labels) {
    if (l < 0 || l >= n_classes)
      throw IndexError("label " + std::to_string(l) + " out of range");
    t[l] = 1.0;
  }
  const double inv = 1.0 / static_cast<double>(labels.size());
  for (double& v : t) v *= inv;
  return t;
}

// ---- gradients -------------------------------------------------------------

Gradients Gradients::zeros_like(const NetParams& params) {
  Gradients g;
  for (const auto& st : params.backbone) {
    ConvStage z;
    z.w = Tensor(st.w.dims);
    z.b = Tensor(st.b.dims);
    g.backbone.push_back(std::move(z));
  }
  g.sal_w = Tensor(params.sal_w.dims);
  g.sal_b = Tensor(params.sal_b.dims);
  g.cls_w = Tensor(params.cls_w.dims);
  g.cls_b = Tensor(params.cls_b.dims);
  return g;
}

void Gradients::zero() {
  for (auto& st : backbone) {
    st.w.zero();
    st.b.zero();
  }
  sal_w.zero();
  sal_b.zero();
  cls_w.zero();
  cls_b.zero();
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  const auto& k = kern::active();
  for (std::size_t i = 0; i < backbone.size(); ++i) {
    k.axpy_f64(backbone[i].w.ptr(), scale, other.backbone[i].w.ptr(), backbone[i].w.numel());
    k.axpy_f64(backbone[i].b.ptr(), scale, other.backbone[i].b.ptr(), backbone[i].b.numel());
  }
  k.axpy_f64(sal_w.ptr(), scale, other.sal_w.ptr(), sal_w.numel());
  k.axpy_f64(sal_b.ptr(), scale, other.sal_b.ptr(), sal_b.numel());
  k.axpy_f64(cls_w.ptr(), scale, other.cls_w.ptr(), cls_w.numel());
  k.axpy_f64(cls_b.ptr(), scale, other.cls_b.ptr(), cls_b.numel());
}

double forward_backward(const Image& image, const BinaryMask* target_mask,
                        const std::vector<double>* cls_target, const NetParams& params,
                        const NetConfig& cfg, const LossOptions& opts, Gradients& grads) {
  Trace tr;
  run_forward(image, params, cfg, tr);
  const int W = tr.width, H = tr.height;
  const int feat_ch = cfg.feature_channels();
  const int K = cfg.concat_channels();
  const std::size_t full_plane = tr.full_grid.plane();
  double total = 0.0;

  std::vector<double> dfused(static_cast<std::size_t>(W) * H, 0.0);
  if (opts.use_saliency) {
    if (!target_mask) throw BadInput("saliency loss requested without a target mask");
    require_same_size(W, H, target_mask->width, target_mask->height, "forward_backward");
    total += balanced_bce(tr.fused_prob.data(), *target_mask, dfused.data()).total;
  }

  std::vector<double> dgap(K, 0.0);
  if (opts.use_classification) {
    if (!cls_target) throw BadInput("classification loss requested without a target");
    if (static_cast<int>(cls_target->size()) != cfg.n_classes)
      throw DimensionMismatch("classification target length");
    std::vector<double> dscore(cfg.n_classes);
    for (int c = 0; c < cfg.n_classes; ++c) {
      const double d = tr.scores[c] - (*cls_target)[c];
      total += 0.5 * d * d;
      dscore[c] = d;
    }
    for (int c = 0; c < cfg.n_classes; ++c) {
      kern::active().axpy_f64(grads.cls_w.ptr() + static_cast<std::size_t>(c) * K, dscore[c],
                              tr.gap.data(), K);
      grads.cls_b.data[c] += dscore[c];
    }
    if (opts.classification_backprop_into_features)
      for (int c = 0; c < cfg.n_classes; ++c)
        kern::active().axpy_f64(dgap.data(), dscore[c],
                                params.cls_w.ptr() + static_cast<std::size_t>(c) * K, K);
  }

  const bool need_feature_grad =
      opts.use_classification && opts.classification_backprop_into_features;
  if (!opts.use_saliency && !need_feature_grad) return total;

  for (std::size_t si = 0; si < tr.scales.size(); ++si) {
    ScaleTrace& st = tr.scales[si];
    const std::size_t grid_plane = st.grid.plane();

    // Head branch: dL/dlogits through the fused sigmoid sum.
    std::vector<double> dlogits(grid_plane * 2, 0.0);
    if (opts.use_saliency) {
      std::vector<double> ddiff(grid_plane, 0.0);
      resize_plane_backward(dfused.data(), W, H, ddiff.data(), st.grid.w, st.grid.h);
      for (std::size_t i = 0; i < grid_plane; ++i) {
        dlogits[grid_plane + i] += ddiff[i];  // foreground channel
        dlogits[i] -= ddiff[i];               // background channel
      }
    }

    // Feature gradient arriving at the last backbone activation.
    std::vector<double> dfeat(static_cast<std::size_t>(feat_ch) * grid_plane, 0.0);

    if (opts.use_saliency) {
      const double* act = st.act.back().data();
      for (int ch = 0; ch < 2; ++ch) {
        const double* dl = dlogits.data() + ch * grid_plane;
        double acc = 0.0;
        for (std::size_t i = 0; i < grid_plane; ++i) acc += dl[i];
        grads.sal_b.data[ch] += acc;
        for (int ci = 0; ci < feat_ch; ++ci) {
          grads.sal_w.data[static_cast<std::size_t>(ch) * feat_ch + ci] +=
              kern::active().dot_f64(dl, act + ci * grid_plane, grid_plane);
          kern::active().axpy_f64(dfeat.data() + ci * grid_plane,
                                  params.sal_w.data[static_cast<std::size_t>(ch) * feat_ch + ci],
                                  dl, grid_plane);
        }
      }
    }

    if (need_feature_grad) {
      // GAP spreads each channel's gradient uniformly over the full grid;
      // undo the cross-scale resize back onto this scale's grid.
      std::vector<double> dresized(full_plane);
      for (int ci = 0; ci < feat_ch; ++ci) {
        const double g = dgap[si * feat_ch + ci] / static_cast<double>(full_plane);
        std::fill(dresized.begin(), dresized.end(), g);
        resize_plane_backward(dresized.data(), tr.full_grid.w, tr.full_grid.h,
                              dfeat.data() + ci * grid_plane, st.grid.w, st.grid.h);
      }
    }

    // Backbone backward through the four stages.
    std::vector<double> dcur = std::move(dfeat);
    for (int stage = static_cast<int>(params.backbone.size()) - 1; stage >= 0; --stage) {
      // Rectifier gate.
      const std::vector<double>& pre = st.pre[stage];
      for (std::size_t i = 0; i < dcur.size(); ++i)
        if (pre[i] <= 0.0) dcur[i] = 0.0;

      const PlaneDims out_dims = st.stage_dims[stage];
      const PlaneDims in_dims = stage == 0 ? st.input : st.stage_dims[stage - 1];
      const int in_ch = stage == 0 ? 3 : params.backbone[stage - 1].w.dims[0];
      const double* in_act = stage == 0 ? st.x0.data() : st.act[stage - 1].data();
      std::vector<double> din;
      double* din_ptr = nullptr;
      if (stage > 0) {
        din.assign(static_cast<std::size_t>(in_ch) * in_dims.plane(), 0.0);
        din_ptr = din.data();
      }
      conv3x3_backward(in_act, in_ch, in_dims.h, in_dims.w, params.backbone[stage].w,
                       kBackboneStrides[stage], dcur.data(), out_dims.h, out_dims.w, din_ptr,
                       grads.backbone[stage].w, grads.backbone[stage].b);
      if (stage > 0) dcur = std::move(din);
    }
  }

  return total;
}

double evaluate_loss(const Image& image, const BinaryMask* target_mask,
                     const std::vector<double>* cls_target, const NetParams& params,
                     const NetConfig& cfg, const LossOptions& opts) {
  Trace tr;
  run_forward(image, params, cfg, tr);
  double total = 0.0;
  if (opts.use_saliency) {
    if (!target_mask) throw BadInput("saliency loss requested without a target mask");
    total += balanced_bce(tr.fused_prob.data(), *target_mask, nullptr).total;
  }
  if (opts.use_classification) {
    if (!cls_target) throw BadInput("classification loss requested without a target");
    total += classification_loss(tr.scores, *cls_target);
  }
  return total;
}

}  // namespace asmo::net
