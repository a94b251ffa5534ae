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

#include "asmo/image.hpp"

#include <algorithm>
#include <cmath>

namespace asmo {

SaliencyMap resize_bilinear(const SaliencyMap& map, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw BadInput("resize target must be at least 1x1");
  if (out_w == map.width && out_h == map.height) return map;

  SaliencyMap out(out_w, out_h);
  const double sx = static_cast<double>(map.width) / out_w;
  const double sy = static_cast<double>(map.height) / out_h;
  for (int oy = 0; oy < out_h; ++oy) {
    const double fy = std::max(0.0, std::min((oy + 0.5) * sy - 0.5,
                                             static_cast<double>(map.height - 1)));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, map.height - 1);
    const double wy = fy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      const double fx = std::max(0.0, std::min((ox + 0.5) * sx - 0.5,
                                               static_cast<double>(map.width - 1)));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, map.width - 1);
      const double wx = fx - x0;
      const double v = (1 - wy) * ((1 - wx) * map.at(x0, y0) + wx * map.at(x1, y0)) +
                       wy * ((1 - wx) * map.at(x0, y1) + wx * map.at(x1, y1));
      out.at(ox, oy) = static_cast<float>(v);
    }
  }
  return out;
}

BinaryMask binarize(const SaliencyMap& map, float t) {
  BinaryMask mask(map.width, map.height);
  for (std::size_t i = 0; i < map.size(); ++i) mask.values[i] = map.values[i] > t ? 1 : 0;
  return mask;
}

}  // namespace asmo
