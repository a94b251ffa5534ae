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
#include <vector>

namespace asmo::pipeline {

// One line per image:
//   image<TAB>labels(comma separated or -)<TAB>annotation(or -)<TAB>gt(or -)
// Relative paths resolve against the manifest file's directory. The
// ground-truth column is evaluation-only; training never reads it.
struct ManifestEntry {
  std::string image_path;
  std::vector<int> labels;
  std::string annotation_path;  // empty when '-'
  std::string gt_path;          // empty when '-'
  bool active = true;           // cleared when the updater discards the sample
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t active_count() const;
};

DatasetManifest load_manifest(const std::string& path);

// Writes active entries (a manifest file always describes the current
// dataset; discarded samples do not reappear).
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// File stem of the entry's image ("dir/foo.png" -> "foo").
std::string entry_stem(const ManifestEntry& entry);

}  // namespace asmo::pipeline
