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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "asmo/errors.hpp"
#include "asmo/kernels.hpp"
#include "asmo/rng.hpp"

using namespace asmo;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Odd/even/large lengths so every vector tail path runs.
const std::size_t kLengths[] = {1, 2, 3, 4, 5, 7, 8, 15, 16, 33, 64, 257};

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(std::string(kern::scalar().name) == "scalar");
  CHECK(kern::active_backend() != "");
}

TEST_CASE("vector backend matches scalar reference") {
  if (!kern::avx2_available()) {
    MESSAGE("AVX2 not available; dispatch falls back to scalar");
    return;
  }
  const kern::Ops& s = kern::scalar();
  kern::force_backend("avx2");
  const kern::Ops& v = kern::active();
  REQUIRE(std::string(v.name) == "avx2");

  Rng rng(42);
  for (std::size_t n : kLengths) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, 2 * n);

    CHECK(v.dot_f64(a.data(), b.data(), n) ==
          doctest::Approx(s.dot_f64(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(v.dot_s2_f64(a.data(), b.data(), n) ==
          doctest::Approx(s.dot_s2_f64(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(v.sum_abs_diff_f64(a.data(), b.data(), n) ==
          doctest::Approx(s.sum_abs_diff_f64(a.data(), b.data(), n)).epsilon(1e-12));

    std::vector<float> fa(n), fb(n);
    for (std::size_t i = 0; i < n; ++i) {
      fa[i] = static_cast<float>(rng.uniform(0, 1));
      fb[i] = static_cast<float>(rng.uniform(0, 1));
    }
    CHECK(v.sum_abs_diff_f32(fa.data(), fb.data(), n) ==
          doctest::Approx(s.sum_abs_diff_f32(fa.data(), fb.data(), n)).epsilon(1e-10));

    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    s.axpy_f64(y1.data(), 0.7, a.data(), n);
    v.axpy_f64(y2.data(), 0.7, a.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    y1 = random_vec(rng, n);
    y2 = y1;
    s.axpy_s2_f64(y1.data(), -1.3, b.data(), n);
    v.axpy_s2_f64(y2.data(), -1.3, b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    auto z1 = random_vec(rng, 2 * n);
    auto z2 = z1;
    s.axpy_scatter2_f64(z1.data(), 0.3, a.data(), n);
    v.axpy_scatter2_f64(z2.data(), 0.3, a.data(), n);
    for (std::size_t i = 0; i < 2 * n; ++i)
      CHECK(z1[i] == doctest::Approx(z2[i]).epsilon(1e-14));

    auto p1 = random_vec(rng, n);
    auto p2 = p1;
    auto vel1 = random_vec(rng, n, -0.1, 0.1);
    auto vel2 = vel1;
    const auto g = random_vec(rng, n);
    s.sgd_update_f64(p1.data(), vel1.data(), g.data(), n, 0.01, 0.9, 0.0005);
    v.sgd_update_f64(p2.data(), vel2.data(), g.data(), n, 0.01, 0.9, 0.0005);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-13));
      CHECK(vel1[i] == doctest::Approx(vel2[i]).epsilon(1e-13));
    }
  }
  kern::force_backend("auto");
}

TEST_CASE("dot of strided view equals dot of gathered copy") {
  const kern::Ops& ops = kern::active();
  Rng rng(7);
  for (std::size_t n : {5u, 16u, 31u}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, 2 * n);
    std::vector<double> even(n);
    for (std::size_t i = 0; i < n; ++i) even[i] = b[2 * i];
    CHECK(ops.dot_s2_f64(a.data(), b.data(), n) ==
          doctest::Approx(ops.dot_f64(a.data(), even.data(), n)).epsilon(1e-12));
  }
}

TEST_CASE("sgd update recursion on a single scalar") {
  // p = 1, grad = 1, lr = 0.1, momentum = 0.9, no decay:
  // v: 0 -> 1 -> 1.9; p: 1 -> 0.9 -> 0.71
  double p = 1.0, v = 0.0, g = 1.0;
  kern::active().sgd_update_f64(&p, &v, &g, 1, 0.1, 0.9, 0.0);
  CHECK(v == doctest::Approx(1.0));
  CHECK(p == doctest::Approx(0.9));
  kern::active().sgd_update_f64(&p, &v, &g, 1, 0.1, 0.9, 0.0);
  CHECK(v == doctest::Approx(1.9));
  CHECK(p == doctest::Approx(0.71));
}

TEST_CASE("weight decay alone shrinks parameters monotonically") {
  double p = 1.0, v = 0.0, g = 0.0;
  double prev = p;
  for (int i = 0; i < 50; ++i) {
    kern::active().sgd_update_f64(&p, &v, &g, 1, 0.1, 0.9, 0.0005);
    CHECK(p < prev);
    CHECK(p > 0.0);
    prev = p;
  }
}

TEST_CASE("unknown backend is rejected") {
  CHECK_THROWS_AS(kern::force_backend("sse9"), ConfigError);
  kern::force_backend("auto");
}
