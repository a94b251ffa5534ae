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

#include "asmo/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "asmo/kernels.hpp"

namespace asmo::metrics {

double mae(const SaliencyMap& s1, const SaliencyMap& s2) {
  require_same_size(s1.width, s1.height, s2.width, s2.height, "mae");
  const double sum = kern::active().sum_abs_diff_f32(s1.values.data(), s2.values.data(),
                                                     s1.size());
  return sum / static_cast<double>(s1.size());
}

std::vector<PrPoint> dataset_pr_curve(const std::vector<SaliencyMap>& preds,
                                      const std::vector<BinaryMask>& gts, int n_thresholds) {
  if (preds.empty()) throw EmptyDataset("dataset_pr_curve needs at least one image");
  if (preds.size() != gts.size())
    throw DimensionMismatch("prediction/mask list lengths differ: " +
                            std::to_string(preds.size()) + " vs " + std::to_string(gts.size()));
  if (n_thresholds < 2) throw BadInput("need at least 2 thresholds");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require_same_size(preds[i].width, preds[i].height, gts[i].width, gts[i].height,
                      "dataset_pr_curve");
    if (gts[i].count_positive() == 0)
      throw BadInput("ground truth " + std::to_string(i) +
                     " has no positive pixel; exclude it upstream");
  }

  std::vector<PrPoint> curve(n_thresholds);
  for (int k = 0; k < n_thresholds; ++k)
    curve[k].threshold = static_cast<double>(k) / (n_thresholds - 1);

  for (std::size_t i = 0; i < preds.size(); ++i) {
    const SaliencyMap& pred = preds[i];
    const BinaryMask& gt = gts[i];
    const std::size_t n = pred.size();
    const std::size_t gt_pos = gt.count_positive();

    for (int t = 0; t < n_thresholds; ++t) {
      const double thr = curve[t].threshold;
      std::size_t tp = 0, pp = 0;
      for (std::size_t p = 0; p < n; ++p) {
        if (static_cast<double>(pred.values[p]) > thr) {
          ++pp;
          tp += gt.values[p];
        }
      }
      const double precision = pp == 0 ? 1.0 : static_cast<double>(tp) / pp;
      const double recall = static_cast<double>(tp) / gt_pos;
      curve[t].precision += precision;
      curve[t].recall += recall;
    }
  }

  const double inv = 1.0 / static_cast<double>(preds.size());
  for (auto& pt : curve) {
    pt.precision *= inv;
    pt.recall *= inv;
  }
  return curve;
}

double f_measure(double precision, double recall) {
  const double denom = kFBetaSquared * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + kFBetaSquared) * precision * recall / denom;
}

double max_f_measure(const std::vector<PrPoint>& curve) {
  if (curve.empty()) throw EmptyCurve("max_f_measure needs a non-empty curve");
  double best = 0.0;
  for (const auto& pt : curve) best = std::max(best, f_measure(pt.precision, pt.recall));
  return best;
}

double mean_dataset_mae(const std::vector<SaliencyMap>& annos,
                        const std::vector<SaliencyMap>& preds) {
  if (annos.empty()) throw EmptyDataset("mean_dataset_mae needs at least one pair");
  if (annos.size() != preds.size())
    throw DimensionMismatch("annotation/prediction list lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < annos.size(); ++i) sum += mae(annos[i], preds[i]);
  return sum / static_cast<double>(annos.size());
}

void write_report(const EvalReport& report, const std::string& txt_path,
                  const std::string& kv_path) {
  {
    std::ofstream txt(txt_path, std::ios::trunc);
    if (!txt) throw IoError("cannot create " + txt_path);
    char line[128];
    std::snprintf(line, sizeof(line), "max F-measure: %.6f", report.max_f);
    txt << line << "\n";
    std::snprintf(line, sizeof(line), "MAE:           %.6f", report.mae);
    txt << line << "\n";
    txt << "PR curve (" << report.curve.size() << " thresholds):\n";
    txt << "threshold precision recall\n";
    for (const auto& pt : report.curve) {
      std::snprintf(line, sizeof(line), "%.6f %.6f %.6f", pt.threshold, pt.precision,
                    pt.recall);
      txt << line << "\n";
    }
  }
  {
    std::ofstream kv(kv_path, std::ios::trunc);
    if (!kv) throw IoError("cannot create " + kv_path);
    char line[160];
    std::snprintf(line, sizeof(line), "max_f = %.17g", report.max_f);
    kv << line << "\n";
    std::snprintf(line, sizeof(line), "mae = %.17g", report.mae);
    kv << line << "\n";
    for (std::size_t i = 0; i < report.curve.size(); ++i) {
      const auto& pt = report.curve[i];
      std::snprintf(line, sizeof(line), "curve.%zu = %.17g,%.17g,%.17g", i, pt.threshold,
                    pt.precision, pt.recall);
      kv << line << "\n";
    }
  }
}

EvalReport read_report_kv(const std::string& kv_path) {
  std::ifstream kv(kv_path);
  if (!kv) throw IoError("cannot open " + kv_path);
  EvalReport report;
  std::string line;
  while (std::getline(kv, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(val);
    if (key == "max_f") {
      report.max_f = std::stod(val);
    } else if (key == "mae") {
      report.mae = std::stod(val);
    } else if (key.rfind("curve.", 0) == 0) {
      PrPoint pt;
      std::istringstream ss(val);
      char comma;
      if (!(ss >> pt.threshold >> comma >> pt.precision >> comma >> pt.recall))
        throw MalformedFile("bad curve entry in " + kv_path + ": " + line);
      report.curve.push_back(pt);
    }
  }
  return report;
}

}  // namespace asmo::metrics
