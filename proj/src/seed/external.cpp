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

#include <filesystem>

#include "asmo/manifest.hpp"
#include "asmo/png_io.hpp"
#include "asmo/seed.hpp"

namespace asmo::seed {

namespace fs = std::filesystem;

std::vector<SaliencyMap> load_external_saliency(const std::string& dir,
                                                const pipeline::DatasetManifest& manifest) {
  std::vector<SaliencyMap> maps;
  maps.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) {
    const fs::path map_path = fs::path(dir) / (pipeline::entry_stem(entry) + ".png");
    if (!fs::exists(map_path))
      throw MissingMap("no saliency map for entry '" + entry.image_path + "' at " +
                       map_path.string());
    SaliencyMap map = load_map(map_path.string());
    const Image image = load_image(entry.image_path);
    if (map.width != image.width || map.height != image.height)
      throw DimensionMismatch("map " + map_path.string() + " is " +
                              std::to_string(map.width) + "x" + std::to_string(map.height) +
                              " but image '" + entry.image_path + "' is " +
                              std::to_string(image.width) + "x" +
                              std::to_string(image.height));
    maps.push_back(std::move(map));
  }
  return maps;
}

}  // namespace asmo::seed
