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

// Evaluation entry points live in pipeline.cpp; this unit hosts the
// PR-curve CSV export used by the `report` subcommand.

#include <fstream>

#include "asmo/pipeline.hpp"

namespace asmo::pipeline {

void write_pr_csv(const metrics::EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out << "threshold,precision,recall\n";
  for (const auto& pt : report.curve)
    out << pt.threshold << ',' << pt.precision << ',' << pt.recall << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace asmo::pipeline
