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

#include <cstddef>
#include <string>

namespace asmo::kern {

// Arithmetic primitives behind the hot loops (convolutions, CRF message
// sums, metric reductions, SGD updates). Every operation has a scalar
// reference implementation and, on x86-64 with AVX2, a vectorized variant;
// the active table is picked once at startup and can be overridden with
// force_backend(). Strided variants serve the stride-2 convolutions.
struct Ops {
  const char* name;

  double (*dot_f64)(const double* a, const double* b, std::size_t n);
  // sum over i of a[i] * b[2*i]
  double (*dot_s2_f64)(const double* a, const double* b, std::size_t n);
  // y[i] += s * x[i]
  void (*axpy_f64)(double* y, double s, const double* x, std::size_t n);
  // y[i] += s * x[2*i]
  void (*axpy_s2_f64)(double* y, double s, const double* x, std::size_t n);
  // y[2*i] += s * x[i]  (transpose of axpy_s2)
  void (*axpy_scatter2_f64)(double* y, double s, const double* x, std::size_t n);

  double (*sum_abs_diff_f32)(const float* a, const float* b, std::size_t n);
  double (*sum_abs_diff_f64)(const double* a, const double* b, std::size_t n);

  // v[i] = momentum*v[i] + g[i] + wd*p[i]; p[i] -= lr*v[i]
  void (*sgd_update_f64)(double* p, double* v, const double* g, std::size_t n,
                         double lr, double momentum, double wd);
};

// Table selected for the running CPU ("auto" unless overridden).
const Ops& active();

// Scalar reference table, always available; the equivalence tests compare
// every vectorized entry against it.
const Ops& scalar();

// Backend override: "auto", "scalar", or "avx2". Throws ConfigError for an
// unknown name or for "avx2" on a CPU without it.
void force_backend(const std::string& name);

// Name of the table active() currently returns.
std::string active_backend();

// True when the AVX2 table is compiled in and the CPU supports it.
bool avx2_available();

}  // namespace asmo::kern
