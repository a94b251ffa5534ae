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
#include <string>
#include <vector>

#include "asmo/image.hpp"

namespace asmo {

// PNG codec for the two on-disk formats: 8-bit RGB for images and 8-bit
// grayscale for saliency maps. Encoding is pinned to fixed zlib settings so
// identical pixel buffers always produce identical bytes.
//
// Map quantization is normative: encode writes q = round(v * 255), decode
// returns q / 255. One encode/decode round trip is therefore idempotent.

// Decodes an 8-bit RGB or grayscale PNG (gray replicated to 3 channels,
// alpha stripped). Throws MalformedFile for broken streams and
// UnsupportedFormat for bit depth != 8 or palette images.
Image decode_image(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_image(const Image& img);

// Decodes an 8-bit grayscale PNG into a SaliencyMap. RGB input is rejected:
// map files are grayscale by contract.
SaliencyMap decode_map(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_map(const SaliencyMap& map);

// File helpers; throw IoError when the path cannot be read or written.
Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);
SaliencyMap load_map(const std::string& path);
void save_map(const SaliencyMap& map, const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace asmo
