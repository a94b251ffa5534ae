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

#include "asmo/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asmo/errors.hpp"

namespace asmo::pipeline {

namespace fs = std::filesystem;

std::size_t DatasetManifest::active_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.active ? 1 : 0;
  return n;
}

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty() || p == "-") return {};
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (base / path).lexically_normal().string();
}

std::vector<int> parse_labels(const std::string& field, const std::string& context) {
  std::vector<int> labels;
  if (field.empty() || field == "-") return labels;
  std::stringstream ss(field);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
      labels.push_back(v);
    } catch (const std::exception&) {
      throw MalformedFile("bad label '" + tok + "' in " + context);
    }
  }
  return labels;
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();

  DatasetManifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4)
      throw MalformedFile("manifest line " + std::to_string(line_no) + " has " +
                          std::to_string(fields.size()) + " fields, expected 4");
    ManifestEntry e;
    e.image_path = resolve(base, fields[0]);
    if (e.image_path.empty())
      throw MalformedFile("manifest line " + std::to_string(line_no) + " misses an image path");
    e.labels = parse_labels(fields[1], path + ":" + std::to_string(line_no));
    e.annotation_path = resolve(base, fields[2]);
    e.gt_path = resolve(base, fields[3]);
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  const auto rel = [&base](const std::string& p) -> std::string {
    if (p.empty()) return "-";
    std::error_code ec;
    const fs::path r = fs::relative(p, base, ec);
    if (ec || r.empty()) return p;
    return r.string();
  };
  for (const auto& e : manifest.entries) {
    if (!e.active) continue;
    out << rel(e.image_path) << '\t';
    if (e.labels.empty()) {
      out << '-';
    } else {
      for (std::size_t i = 0; i < e.labels.size(); ++i) {
        if (i) out << ',';
        out << e.labels[i];
      }
    }
    out << '\t' << rel(e.annotation_path) << '\t' << rel(e.gt_path) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::string entry_stem(const ManifestEntry& entry) {
  return fs::path(entry.image_path).stem().string();
}

}  // namespace asmo::pipeline
