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

#include <string>

#include "asmo/net.hpp"

namespace asmo::net {

// Versioned binary parameter container:
//   magic "ASMO" | u32 version | tensors...
// each tensor: u32 name length | name | u32 rank | u32 dims... |
// little-endian float32 data. Saving after one load round-trip is
// bit-exact (parameters are quantized to float32 exactly once).
inline constexpr char kCheckpointMagic[4] = {'A', 'S', 'M', 'O'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const NetParams& params, const std::string& path);
NetParams load_checkpoint(const std::string& path);

}  // namespace asmo::net
