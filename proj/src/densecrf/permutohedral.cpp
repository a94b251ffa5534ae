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

#include "asmo/permutohedral.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <unordered_map>

#include "asmo/errors.hpp"

namespace asmo::crf {

namespace {

// Open-addressing hash table over integer lattice keys of dimension d.
// Insertion order is the lattice-point index, which keeps every later
// traversal deterministic.
class KeyTable {
 public:
  KeyTable(int key_dim, std::size_t expected) : dim_(key_dim), capacity_(1) {
    while (capacity_ < expected * 2 + 8) capacity_ <<= 1;
    mask_ = capacity_ - 1;
    slots_.assign(capacity_, -1);
    keys_.reserve(expected * dim_);
  }

  int size() const { return static_cast<int>(keys_.size() / dim_); }
  const short* key(int idx) const { return keys_.data() + static_cast<std::size_t>(idx) * dim_; }

  int find(const short* key, bool insert) {
    std::size_t h = hash(key) & mask_;
    while (true) {
      int slot = slots_[h];
      if (slot < 0) {
        if (!insert) return -1;
        slot = size();
        keys_.insert(keys_.end(), key, key + dim_);
        slots_[h] = slot;
        return slot;
      }
      if (std::memcmp(this->key(slot), key, dim_ * sizeof(short)) == 0) return slot;
      h = (h + 1) & mask_;
    }
  }

 private:
  std::size_t hash(const short* key) const {
    std::uint64_t h = 1469598103934665603ull;
    for (int i = 0; i < dim_; ++i) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint16_t>(key[i]));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }

  int dim_;
  std::size_t capacity_;
  std::size_t mask_;
  std::vector<int> slots_;
  std::vector<short> keys_;
};

}  // namespace

PermutohedralLattice::PermutohedralLattice(const std::vector<double>& positions, int n,
                                           int dim)
    : n_(n), d_(dim) {
  if (n < 1 || dim < 1) throw BadInput("lattice needs n >= 1, dim >= 1");
  if (positions.size() != static_cast<std::size_t>(n) * dim)
    throw DimensionMismatch("positions buffer size does not match n*dim");

  const int d = d_;
  offsets_.resize(static_cast<std::size_t>(n) * (d + 1));
  barycentric_.resize(static_cast<std::size_t>(n) * (d + 1));
  inv_sqrt_gain_.resize(n);

  // Diagonal of the feature embedding; the constant makes the composite
  // of splat, blur and slice a unit-variance Gaussian in feature units.
  const double inv_std_dev = std::sqrt(2.0 / 3.0) * (d + 1);
  std::vector<double> scale(d);
  for (int i = 0; i < d; ++i)
    scale[i] = inv_std_dev / std::sqrt(static_cast<double>(i + 1) * (i + 2));

  std::vector<short> canonical(static_cast<std::size_t>(d + 1) * (d + 1));
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d - i; ++j) canonical[i * (d + 1) + j] = static_cast<short>(i);
    for (int j = d - i + 1; j <= d; ++j)
      canonical[i * (d + 1) + j] = static_cast<short>(i - (d + 1));
  }

  KeyTable table(d, static_cast<std::size_t>(n) * (d + 1));

  std::vector<double> elevated(d + 1), bary(d + 2);
  std::vector<int> greedy(d + 1), rank(d + 1);
  std::vector<short> key(d);
  const double down_factor = 1.0 / (d + 1);

  for (int k = 0; k < n; ++k) {
    const double* f = positions.data() + static_cast<std::size_t>(k) * d;

    // Embed onto the hyperplane sum(x) = 0 in d+1 dimensions.
    double sm = 0.0;
    for (int j = d; j > 0; --j) {
      const double cf = f[j - 1] * scale[j - 1];
      elevated[j] = sm - j * cf;
      sm += cf;
    }
    elevated[0] = sm;

    // Closest zero-colored lattice point.
    int coord_sum = 0;
    for (int i = 0; i <= d; ++i) {
      const double v = elevated[i] * down_factor;
      const double up = std::ceil(v) * (d + 1);
      const double down = std::floor(v) * (d + 1);
      greedy[i] =
          static_cast<int>(std::lround(up - elevated[i] < elevated[i] - down ? up : down));
      coord_sum += greedy[i];
    }
    coord_sum /= d + 1;

    // Rank differentials, then repair the rounding so coordinates sum to 0.
    std::fill(rank.begin(), rank.end(), 0);
    for (int i = 0; i < d; ++i) {
      const double di = elevated[i] - greedy[i];
      for (int j = i + 1; j <= d; ++j) {
        if (di < elevated[j] - greedy[j])
          ++rank[i];
        else
          ++rank[j];
      }
    }
    for (int i = 0; i <= d; ++i) {
      rank[i] += coord_sum;
      if (rank[i] < 0) {
        rank[i] += d + 1;
        greedy[i] += d + 1;
      } else if (rank[i] > d) {
        rank[i] -= d + 1;
        greedy[i] -= d + 1;
      }
    }

    // Barycentric coordinates inside the enclosing simplex.
    std::fill(bary.begin(), bary.end(), 0.0);
    for (int i = 0; i <= d; ++i) {
      const double v = (elevated[i] - greedy[i]) * down_factor;
      bary[d - rank[i]] += v;
      bary[d - rank[i] + 1] -= v;
    }
    bary[0] += 1.0 + bary[d + 1];

    for (int r = 0; r <= d; ++r) {
      for (int i = 0; i < d; ++i)
        key[i] = static_cast<short>(greedy[i] + canonical[r * (d + 1) + rank[i]]);
      offsets_[static_cast<std::size_t>(k) * (d + 1) + r] = table.find(key.data(), true);
      barycentric_[static_cast<std::size_t>(k) * (d + 1) + r] = bary[r];
    }
  }

  m_ = table.size();

  // Neighbor indices along each lattice axis for the blur.
  blur_n1_.assign(static_cast<std::size_t>(d + 1) * m_, -1);
  blur_n2_.assign(static_cast<std::size_t>(d + 1) * m_, -1);
  std::vector<short> nkey(d);
  for (int axis = 0; axis <= d; ++axis) {
    for (int i = 0; i < m_; ++i) {
      const short* src = table.key(i);
      for (int c = 0; c < d; ++c) nkey[c] = static_cast<short>(src[c] - 1);
      if (axis < d) nkey[axis] = static_cast<short>(src[axis] + d);
      blur_n1_[static_cast<std::size_t>(axis) * m_ + i] = table.find(nkey.data(), false);
      for (int c = 0; c < d; ++c) nkey[c] = static_cast<short>(src[c] + 1);
      if (axis < d) nkey[axis] = static_cast<short>(src[axis] - d);
      blur_n2_[static_cast<std::size_t>(axis) * m_ + i] = table.find(nkey.data(), false);
    }
  }

  compute_self_gains();
}

// The pipeline's response of a point to itself is b' * G * b, where
// G[r][s] is the blur mass that flows from simplex vertex r to vertex s
// through the lattice points that actually exist (absent neighbors
// truncate blur paths, so G depends on local occupancy, not just on d).
// G is shared by every pixel enclosed in the same simplex; blocks are
// memoized by vertex tuple. Dividing values by sqrt(gain) on both the
// splat and the slice side makes the corrected kernel exactly 1 at zero
// distance.
void PermutohedralLattice::compute_self_gains() {
  const int d = d_;
  const int nv = d + 1;

  std::map<std::vector<int>, std::vector<double>> blocks;
  std::vector<int> simplex(nv);

  // Sparse multi-channel impulse response: channel r tracks mass that
  // started at vertex r.
  std::unordered_map<int, std::vector<double>> support, next;

  for (int k = 0; k < n_; ++k) {
    for (int r = 0; r < nv; ++r)
      simplex[r] = offsets_[static_cast<std::size_t>(k) * nv + r];

    auto it = blocks.find(simplex);
    if (it == blocks.end()) {
      support.clear();
      for (int r = 0; r < nv; ++r) {
        auto& ch = support[simplex[r]];
        if (ch.empty()) ch.assign(nv, 0.0);
        ch[r] = 1.0;
      }
      for (int axis = 0; axis <= d; ++axis) {
        const int* n1 = blur_n1_.data() + static_cast<std::size_t>(axis) * m_;
        const int* n2 = blur_n2_.data() + static_cast<std::size_t>(axis) * m_;
        next.clear();
        for (const auto& [p, ch] : support) {
          // Mass stays at p and leaks to whichever neighbors exist.
          auto& stay = next[p];
          if (stay.empty()) stay.assign(nv, 0.0);
          for (int c = 0; c < nv; ++c) stay[c] += ch[c];
          for (int nb : {n1[p], n2[p]}) {
            if (nb < 0) continue;
            auto& dst = next[nb];
            if (dst.empty()) dst.assign(nv, 0.0);
            for (int c = 0; c < nv; ++c) dst[c] += 0.5 * ch[c];
          }
        }
        std::swap(support, next);
      }
      std::vector<double> block(static_cast<std::size_t>(nv) * nv, 0.0);
      for (int s = 0; s < nv; ++s) {
        auto f = support.find(simplex[s]);
        if (f == support.end()) continue;
        for (int r = 0; r < nv; ++r) block[static_cast<std::size_t>(r) * nv + s] = f->second[r];
      }
      it = blocks.emplace(simplex, std::move(block)).first;
    }

    const std::vector<double>& g = it->second;
    const double* b = barycentric_.data() + static_cast<std::size_t>(k) * nv;
    double gain = 0.0;
    for (int r = 0; r < nv; ++r)
      for (int s = 0; s < nv; ++s) gain += b[r] * b[s] * g[static_cast<std::size_t>(r) * nv + s];
    inv_sqrt_gain_[k] = 1.0 / std::sqrt(gain);
  }
}

void PermutohedralLattice::filter(const double* in, double* out, int value_dim) const {
  const int d = d_;
  const int vd = value_dim;
  // Slot 0 is a zero sink for missing blur neighbors.
  std::vector<double> values(static_cast<std::size_t>(m_ + 1) * vd, 0.0);
  std::vector<double> new_values(static_cast<std::size_t>(m_ + 1) * vd, 0.0);

  // Splat (with the pre-side of the self-gain correction).
  for (int k = 0; k < n_; ++k) {
    const double w = inv_sqrt_gain_[k];
    for (int r = 0; r <= d; ++r) {
      const std::size_t o =
          static_cast<std::size_t>(offsets_[static_cast<std::size_t>(k) * (d + 1) + r] + 1) * vd;
      const double b = barycentric_[static_cast<std::size_t>(k) * (d + 1) + r] * w;
      for (int c = 0; c < vd; ++c) values[o + c] += b * in[static_cast<std::size_t>(k) * vd + c];
    }
  }

  // Blur along each lattice direction with taps (0.5, 1, 0.5).
  for (int axis = 0; axis <= d; ++axis) {
    const int* n1 = blur_n1_.data() + static_cast<std::size_t>(axis) * m_;
    const int* n2 = blur_n2_.data() + static_cast<std::size_t>(axis) * m_;
    for (int i = 0; i < m_; ++i) {
      const double* v = values.data() + static_cast<std::size_t>(i + 1) * vd;
      const double* a = values.data() + static_cast<std::size_t>(n1[i] + 1) * vd;
      const double* b = values.data() + static_cast<std::size_t>(n2[i] + 1) * vd;
      double* o = new_values.data() + static_cast<std::size_t>(i + 1) * vd;
      for (int c = 0; c < vd; ++c) o[c] = v[c] + 0.5 * (a[c] + b[c]);
    }
    std::swap(values, new_values);
  }

  // Slice (with the post-side of the correction).
  for (int k = 0; k < n_; ++k) {
    const double w = inv_sqrt_gain_[k];
    for (int c = 0; c < vd; ++c) out[static_cast<std::size_t>(k) * vd + c] = 0.0;
    for (int r = 0; r <= d; ++r) {
      const std::size_t o =
          static_cast<std::size_t>(offsets_[static_cast<std::size_t>(k) * (d + 1) + r] + 1) * vd;
      const double b = barycentric_[static_cast<std::size_t>(k) * (d + 1) + r] * w;
      for (int c = 0; c < vd; ++c) out[static_cast<std::size_t>(k) * vd + c] += b * values[o + c];
    }
  }
}

std::vector<double> brute_force_gaussian_filter(const std::vector<double>& positions, int n,
                                                int dim, const std::vector<double>& values,
                                                int value_dim) {
  if (positions.size() != static_cast<std::size_t>(n) * dim ||
      values.size() != static_cast<std::size_t>(n) * value_dim)
    throw DimensionMismatch("positions/values buffer sizes do not match n");
  std::vector<double> out(static_cast<std::size_t>(n) * value_dim, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* fi = positions.data() + static_cast<std::size_t>(i) * dim;
    for (int j = 0; j < n; ++j) {
      const double* fj = positions.data() + static_cast<std::size_t>(j) * dim;
      double dist2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double diff = fi[c] - fj[c];
        dist2 += diff * diff;
      }
      const double w = std::exp(-0.5 * dist2);
      for (int c = 0; c < value_dim; ++c)
        out[static_cast<std::size_t>(i) * value_dim + c] +=
            w * values[static_cast<std::size_t>(j) * value_dim + c];
    }
  }
  return out;
}

std::vector<double> lattice_filter(const std::vector<double>& positions, int n, int dim,
                                   const std::vector<double>& values, int value_dim) {
  if (values.size() != static_cast<std::size_t>(n) * value_dim)
    throw DimensionMismatch("values buffer size does not match n*value_dim");
  PermutohedralLattice lattice(positions, n, dim);
  std::vector<double> out(values.size());
  lattice.filter(values.data(), out.data(), value_dim);
  return out;
}

}  // namespace asmo::crf
