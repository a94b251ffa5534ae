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

#include "asmo/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace asmo::net {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw MalformedFile("truncated checkpoint");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ofstream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::ifstream& in) {
  const std::uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void write_tensor(std::ofstream& out, const std::string& name, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (int d : t.dims) put_u32(out, static_cast<std::uint32_t>(d));
  for (double v : t.data) put_f32(out, static_cast<float>(v));
}

}  // namespace

void save_checkpoint(const NetParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out.write(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  for (std::size_t i = 0; i < params.backbone.size(); ++i) {
    const std::string base = "backbone." + std::to_string(i);
    write_tensor(out, base + ".w", params.backbone[i].w);
    write_tensor(out, base + ".b", params.backbone[i].b);
  }
  write_tensor(out, "saliency_head.w", params.sal_w);
  write_tensor(out, "saliency_head.b", params.sal_b);
  write_tensor(out, "classifier.w", params.cls_w);
  write_tensor(out, "classifier.b", params.cls_b);
  if (!out) throw IoError("write failed: " + path);
}

NetParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw MalformedFile(path + " is not a parameter checkpoint");
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion)
    throw UnsupportedFormat("checkpoint version " + std::to_string(version));

  std::map<std::string, Tensor> tensors;
  while (true) {
    in.peek();
    if (in.eof()) break;
    const std::uint32_t name_len = get_u32(in);
    if (name_len > 4096) throw MalformedFile("implausible tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint32_t rank = get_u32(in);
    if (rank > 8) throw MalformedFile("implausible tensor rank");
    std::vector<int> dims(rank);
    std::size_t numel = 1;
    for (auto& d : dims) {
      d = static_cast<int>(get_u32(in));
      if (d < 1 || d > (1 << 24)) throw MalformedFile("implausible tensor dimension");
      numel *= static_cast<std::size_t>(d);
    }
    Tensor t(dims);
    for (std::size_t i = 0; i < numel; ++i) t.data[i] = get_f32(in);
    if (!in) throw MalformedFile("truncated checkpoint");
    tensors.emplace(std::move(name), std::move(t));
  }

  const auto take = [&](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw MalformedFile("checkpoint misses tensor " + name);
    Tensor t = std::move(it->second);
    tensors.erase(it);
    return t;
  };

  NetParams params;
  for (std::size_t i = 0;; ++i) {
    const std::string base = "backbone." + std::to_string(i);
    if (tensors.find(base + ".w") == tensors.end()) break;
    ConvStage st;
    st.w = take(base + ".w");
    st.b = take(base + ".b");
    params.backbone.push_back(std::move(st));
  }
  if (params.backbone.empty()) throw MalformedFile("checkpoint has no backbone stages");
  params.sal_w = take("saliency_head.w");
  params.sal_b = take("saliency_head.b");
  params.cls_w = take("classifier.w");
  params.cls_b = take("classifier.b");
  return params;
}

}  // namespace asmo::net
