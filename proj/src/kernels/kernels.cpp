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

#include <atomic>

#include "asmo/errors.hpp"

namespace asmo::kern {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_table();  // kernels_avx2.cpp
#endif

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const Ops* pick_auto() {
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_available()) return &avx2_table();
#endif
  return &scalar();
}

std::atomic<const Ops*> g_active{nullptr};

}  // namespace

const Ops& active() {
  const Ops* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = pick_auto();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void force_backend(const std::string& name) {
  if (name == "auto") {
    g_active.store(pick_auto(), std::memory_order_release);
  } else if (name == "scalar") {
    g_active.store(&scalar(), std::memory_order_release);
  } else if (name == "avx2") {
#if defined(__x86_64__) || defined(_M_X64)
    if (!avx2_available()) throw ConfigError("avx2 backend requested but CPU lacks AVX2/FMA");
    g_active.store(&avx2_table(), std::memory_order_release);
#else
    throw ConfigError("avx2 backend is only available on x86-64 builds");
#endif
  } else {
    throw ConfigError("unknown kernel backend '" + name + "' (auto|scalar|avx2)");
  }
}

std::string active_backend() { return active().name; }

}  // namespace asmo::kern
