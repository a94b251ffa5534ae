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

#include "asmo/kernels.hpp"

#include <cmath>

namespace asmo::kern {

namespace {

double dot_f64(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double dot_s2_f64(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[2 * i];
  return acc;
}

void axpy_f64(double* y, double s, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
}

void axpy_s2_f64(double* y, double s, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += s * x[2 * i];
}

void axpy_scatter2_f64(double* y, double s, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[2 * i] += s * x[i];
}

double sum_abs_diff_f32(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return acc;
}

double sum_abs_diff_f64(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

void sgd_update_f64(double* p, double* v, const double* g, std::size_t n,
                    double lr, double momentum, double wd) {
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = momentum * v[i] + g[i] + wd * p[i];
    p[i] -= lr * v[i];
  }
}

}  // namespace

const Ops& scalar() {
  static const Ops table = {
      "scalar",       dot_f64,          dot_s2_f64,       axpy_f64,
      axpy_s2_f64,    axpy_scatter2_f64, sum_abs_diff_f32, sum_abs_diff_f64,
      sgd_update_f64,
  };
  return table;
}

}  // namespace asmo::kern
