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

#include "asmo/tensor.hpp"

#include <algorithm>

#include "asmo/errors.hpp"

namespace asmo::net {

Tensor::Tensor(std::vector<int> d) : dims(std::move(d)) {
  std::size_t n = 1;
  for (int dim : dims) {
    if (dim < 1) throw ShapeError("tensor dimensions must be >= 1");
    n *= static_cast<std::size_t>(dim);
  }
  data.assign(n, 0.0);
}

void Tensor::zero() { std::fill(data.begin(), data.end(), 0.0); }

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

}  // namespace asmo::net
