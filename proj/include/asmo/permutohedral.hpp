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

namespace asmo::crf {

// Approximate high-dimensional Gaussian filtering on the permutohedral
// lattice (splat / blur / slice). For positions f_i (already divided by
// their bandwidths) and values v_i, filter() approximates
//
//   out_i = sum_j exp(-|f_i - f_j|^2 / 2) * v_j        (including j = i)
//
// The plain splat/blur/slice pipeline realizes this kernel only up to a
// gain that depends on each point's barycentric position and on which
// lattice neighbors happen to be occupied (absent neighbors truncate
// blur paths). The response of every point to itself is computable
// exactly by replaying the blur on its enclosing simplex, so filter()
// divides the splatted values and the sliced output by the square root
// of that self-gain; the corrected kernel is exactly 1 at zero distance.
class PermutohedralLattice {
 public:
  // positions: n*dim row-major, pre-scaled by 1/theta.
  PermutohedralLattice(const std::vector<double>& positions, int n, int dim);

  // in/out: n*value_dim row-major. out may not alias in.
  void filter(const double* in, double* out, int value_dim) const;

  int lattice_point_count() const { return m_; }

 private:
  void compute_self_gains();

  int n_ = 0;
  int d_ = 0;
  int m_ = 0;                        // distinct lattice points
  std::vector<int> offsets_;         // n*(d+1), vertex index per point
  std::vector<double> barycentric_;  // n*(d+1)
  std::vector<double> inv_sqrt_gain_;  // n, self-gain correction
  std::vector<int> blur_n1_, blur_n2_;  // (d+1)*m neighbor indices, -1 if absent
};

// O(n^2) reference of the same quantity; the oracle side of the
// equivalence tests and the exact backend for tiny inputs.
std::vector<double> brute_force_gaussian_filter(const std::vector<double>& positions, int n,
                                                int dim, const std::vector<double>& values,
                                                int value_dim);

// Convenience wrapper: build a lattice for `positions` and filter `values`.
std::vector<double> lattice_filter(const std::vector<double>& positions, int n, int dim,
                                   const std::vector<double>& values, int value_dim);

}  // namespace asmo::crf
