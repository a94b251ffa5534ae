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

#include "asmo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "asmo/checkpoint.hpp"
#include "asmo/png_io.hpp"
#include "asmo/seed.hpp"
#include "asmo/trainer.hpp"
#include "asmo/updater.hpp"

namespace asmo::pipeline {

namespace fs = std::filesystem;

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min<std::size_t>(threads, count);
  pool.reserve(n_threads);
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct LoadedEntry {
  std::size_t manifest_index;
  Image image;
  SaliencyMap annotation;
  std::vector<int> labels;
};

// Reads images and current annotations of the active entries; missing
// annotations are seeded with the built-in detector and written under
// workdir/seeds so the manifest stays resumable.
std::vector<LoadedEntry> load_active(DatasetManifest& manifest, const PipelineConfig& cfg,
                                     const std::string& workdir, bool use_labels) {
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i)
    if (manifest.entries[i].active) active.push_back(i);
  if (active.empty()) throw EmptyDataset("manifest has no active entries");

  std::vector<LoadedEntry> loaded(active.size());
  bool need_seed_dir = false;
  for (std::size_t i : active)
    if (manifest.entries[i].annotation_path.empty()) need_seed_dir = true;
  if (need_seed_dir) fs::create_directories(fs::path(workdir) / "seeds");

  parallel_for(active.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t mi = active[k];
    ManifestEntry& entry = manifest.entries[mi];
    LoadedEntry le;
    le.manifest_index = mi;
    le.image = load_image(entry.image_path);
    if (entry.annotation_path.empty()) {
      le.annotation = seed::mbd_seed_saliency(le.image, cfg.seed);
      const std::string path =
          (fs::path(workdir) / "seeds" / (entry_stem(entry) + ".png")).string();
      save_map(le.annotation, path);
      entry.annotation_path = path;
    } else {
      le.annotation = load_map(entry.annotation_path);
    }
    require_same_size(le.image.width, le.image.height, le.annotation.width,
                      le.annotation.height, "annotation for " + entry.image_path);
    if (use_labels) {
      le.labels = entry.labels;
      for (int l : le.labels)
        if (l >= cfg.net.n_classes)
          throw BadInput("label " + std::to_string(l) + " exceeds net.n_classes in " +
                         entry.image_path);
    }
    loaded[k] = std::move(le);
  });
  return loaded;
}

net::TrainSample to_sample(const LoadedEntry& le, const PipelineConfig& cfg) {
  net::TrainSample s;
  s.image = le.image;
  s.target = binarize(le.annotation, static_cast<float>(cfg.binarize_threshold));
  s.labels = le.labels;
  return s;
}

struct UpdateOutcome {
  updater::UpdateBranch branch;
  double mae_anno_predict;
  double mae_anno_cam;
  double mae_predict_cam;
  double anno_vs_predict_mae;  // stopping-criterion term (raw maps)
  SaliencyMap updated;         // valid unless discarded
  bool discarded;
};

// The shared round body of both stages: train on the current annotations,
// predict, refine, run the annotation update on every training entry.
class StageRunner {
 public:
  StageRunner(DatasetManifest& manifest, const PipelineConfig& cfg, std::string workdir,
              bool use_labels, net::ParamFilter filter)
      : manifest_(manifest),
        cfg_(cfg),
        workdir_(std::move(workdir)),
        use_labels_(use_labels),
        filter_(filter) {
    fs::create_directories(workdir_);
    audit_.open((fs::path(workdir_) / "audit.log").string(), std::ios::app);
    if (!audit_) throw IoError("cannot open audit log in " + workdir_);
  }

  // Fixed validation split over the initially active entries.
  void split_validation(std::uint64_t seed_value) {
    entries_ = load_active(manifest_, cfg_, workdir_, use_labels_);
    std::vector<std::size_t> order(entries_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed_value);
    rng.shuffle(order);
    std::size_t n_val = static_cast<std::size_t>(entries_.size() * cfg_.validation_fraction);
    n_val = std::max<std::size_t>(1, std::min(n_val, entries_.size() - 1));
    val_set_.assign(order.begin(), order.begin() + n_val);
    train_set_.assign(order.begin() + n_val, order.end());
    std::sort(val_set_.begin(), val_set_.end());
    std::sort(train_set_.begin(), train_set_.end());
  }

  StageResult run(const net::NetParams& initial, int cam_top_k,
                  const std::vector<SaliencyMap>* fixed_cams) {
    StageResult result;
    result.params = initial;
    RoundState& state = result.state;

    for (int round = 1; round <= cfg_.max_rounds; ++round) {
      state.round_index = round;

      // Train on the active training split.
      std::vector<net::TrainSample> train, val;
      for (std::size_t k : train_set_)
        if (is_active(k)) train.push_back(to_sample(entries_[k], cfg_));
      for (std::size_t k : val_set_)
        if (is_active(k)) val.push_back(to_sample(entries_[k], cfg_));
      if (train.empty()) throw EmptyDataset("all training entries were discarded");
      if (val.empty()) throw EmptyDataset("all validation entries were discarded");

      net::TrainConfig round_train = cfg_.train;
      round_train.rng_seed = cfg_.train.rng_seed + static_cast<std::uint64_t>(round);
      const net::TrainRoundResult tr =
          net::train_round(train, val, round_train, cfg_.net, result.params, filter_);
      result.params = tr.best_params;
      state.best_validation_loss = tr.best_validation_loss;
      save_checkpoint(result.params,
                      (fs::path(workdir_) / ("params_round_" + std::to_string(round) + ".ckpt"))
                          .string());

      // Predict, refine and update every active training entry.
      std::vector<std::size_t> targets;
      for (std::size_t k : train_set_)
        if (is_active(k)) targets.push_back(k);
      std::vector<UpdateOutcome> outcomes(targets.size());
      parallel_for(targets.size(), cfg_.threads, [&](std::size_t j) {
        const std::size_t k = targets[j];
        const LoadedEntry& le = entries_[k];
        const net::ForwardOutputs fwd = net::forward(le.image, result.params, cfg_.net);
        const SaliencyMap& s_predict = fwd.fused_prob;
        const SaliencyMap s_cam = fixed_cams
                                      ? (*fixed_cams)[k]
                                      : net::top_k_cam_mean(fwd, result.params, cam_top_k);
        const updater::AnnotationBundle bundle =
            updater::prepare_bundle(le.image, le.annotation, s_predict, s_cam, cfg_.crf);
        const updater::UpdateDecision decision =
            updater::update_annotation(le.image, bundle, cfg_.thresholds, cfg_.crf);
        UpdateOutcome& out = outcomes[j];
        out.branch = decision.branch;
        out.mae_anno_predict = decision.mae_anno_predict;
        out.mae_anno_cam = decision.mae_anno_cam;
        out.mae_predict_cam = decision.mae_predict_cam;
        out.anno_vs_predict_mae = metrics::mae(le.annotation, s_predict);
        out.discarded = !decision.s_update.has_value();
        if (!out.discarded) out.updated = std::move(*decision.s_update);
      });

      // Apply outcomes in manifest order: audit, discard flags, chained
      // annotations for the next round.
      const fs::path round_dir =
          fs::path(workdir_) / ("anno_round_" + std::to_string(round));
      fs::create_directories(round_dir);
      double mae_sum = 0.0;
      for (std::size_t j = 0; j < targets.size(); ++j) {
        const std::size_t k = targets[j];
        ManifestEntry& entry = manifest_.entries[entries_[k].manifest_index];
        UpdateOutcome& out = outcomes[j];
        mae_sum += out.anno_vs_predict_mae;
        audit_ << "round=" << round << "\t" << entry_stem(entry) << "\tbranch="
               << static_cast<int>(out.branch) << "\tmae_ap=" << out.mae_anno_predict
               << "\tmae_ac=" << out.mae_anno_cam << "\tmae_pc=" << out.mae_predict_cam
               << "\n";
        if (out.discarded) {
          entry.active = false;
          ++state.discarded_count;
        } else {
          const std::string path = (round_dir / (entry_stem(entry) + ".png")).string();
          save_map(out.updated, path);
          entry.annotation_path = path;
          entries_[k].annotation = load_map(path);  // chained, after quantization
        }
      }
      audit_.flush();
      const double mean_mae = mae_sum / static_cast<double>(targets.size());
      state.mean_mae_history.push_back(mean_mae);
      save_manifest(manifest_,
                    (fs::path(workdir_) / ("manifest_round_" + std::to_string(round) + ".tsv"))
                        .string());

      if (mean_mae < cfg_.stop_mean_mae) {
        state.stop_reason = StopReason::kThreshold;
        break;
      }
      if (round == cfg_.max_rounds) {
        state.stop_reason = StopReason::kRoundCap;
        break;
      }
    }

    save_checkpoint(result.params, (fs::path(workdir_) / "params.ckpt").string());
    write_round_state(result.state);
    return result;
  }

  const std::vector<LoadedEntry>& entries() const { return entries_; }

 private:
  bool is_active(std::size_t k) const {
    return manifest_.entries[entries_[k].manifest_index].active;
  }

  void write_round_state(const RoundState& state) const {
    std::ofstream out((fs::path(workdir_) / "rounds.txt").string(), std::ios::trunc);
    out << "rounds_run = " << state.mean_mae_history.size() << "\n";
    for (std::size_t i = 0; i < state.mean_mae_history.size(); ++i)
      out << "mean_mae_round_" << (i + 1) << " = " << state.mean_mae_history[i] << "\n";
    out << "discarded = " << state.discarded_count << "\n";
    out << "best_validation_loss = " << state.best_validation_loss << "\n";
    out << "stop_reason = "
        << (state.stop_reason == StopReason::kThreshold ? "threshold" : "round_cap") << "\n";
  }

  DatasetManifest& manifest_;
  const PipelineConfig& cfg_;
  std::string workdir_;
  bool use_labels_;
  net::ParamFilter filter_;
  std::vector<LoadedEntry> entries_;
  std::vector<std::size_t> train_set_, val_set_;
  std::ofstream audit_;
};

}  // namespace

StageResult run_stage1(DatasetManifest& manifest, const PipelineConfig& cfg,
                       const std::string& workdir) {
  cfg.validate();
  StageRunner runner(manifest, cfg, workdir, /*use_labels=*/true, net::ParamFilter::kAll);
  runner.split_validation(cfg.train.rng_seed);
  Rng init_rng(cfg.train.rng_seed);
  const net::NetParams initial = net::init_params(cfg.net, init_rng);
  return runner.run(initial, cfg.cam_top_k_stage1, nullptr);
}

StageResult run_stage2(DatasetManifest& manifest, const net::NetParams& stage1_params,
                       const PipelineConfig& cfg, const std::string& workdir) {
  cfg.validate();
  StageRunner runner(manifest, cfg, workdir, /*use_labels=*/false,
                     net::ParamFilter::kSaliencyStream);
  runner.split_validation(cfg.train.rng_seed);

  // Guidance maps come from the stage-1 model, computed once per image.
  const auto& entries = runner.entries();
  std::vector<SaliencyMap> cams(entries.size());
  fs::create_directories(fs::path(workdir) / "cam");
  parallel_for(entries.size(), cfg.threads, [&](std::size_t k) {
    const net::ForwardOutputs fwd = net::forward(entries[k].image, stage1_params, cfg.net);
    cams[k] = net::top_k_cam_mean(fwd, stage1_params, cfg.cam_top_k_stage2);
    const ManifestEntry& entry = manifest.entries[entries[k].manifest_index];
    save_map(cams[k], (fs::path(workdir) / "cam" / (entry_stem(entry) + ".png")).string());
  });

  return runner.run(stage1_params, cfg.cam_top_k_stage2, &cams);
}

void predict_maps(const DatasetManifest& manifest, const net::NetParams& params,
                  const PipelineConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i)
    if (manifest.entries[i].active) active.push_back(i);
  parallel_for(active.size(), cfg.threads, [&](std::size_t k) {
    const ManifestEntry& entry = manifest.entries[active[k]];
    const Image image = load_image(entry.image_path);
    const net::ForwardOutputs fwd = net::forward(image, params, cfg.net);
    save_map(fwd.fused_prob, (fs::path(out_dir) / (entry_stem(entry) + ".png")).string());
  });
}

void seed_manifest(DatasetManifest& manifest, const PipelineConfig& cfg,
                   const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i)
    if (manifest.entries[i].active) active.push_back(i);
  if (active.empty()) throw EmptyDataset("manifest has no active entries");
  parallel_for(active.size(), cfg.threads, [&](std::size_t k) {
    ManifestEntry& entry = manifest.entries[active[k]];
    const Image image = load_image(entry.image_path);
    const SaliencyMap map = seed::mbd_seed_saliency(image, cfg.seed);
    const std::string path = (fs::path(out_dir) / (entry_stem(entry) + ".png")).string();
    save_map(map, path);
    entry.annotation_path = path;
  });
}

void refine_directory(const std::string& images_dir, const std::string& maps_dir,
                      const std::string& out_dir, const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<fs::path> images;
  for (const auto& e : fs::directory_iterator(images_dir))
    if (e.is_regular_file() && e.path().extension() == ".png") images.push_back(e.path());
  std::sort(images.begin(), images.end());
  if (images.empty()) throw EmptyDataset("no .png images in " + images_dir);
  fs::create_directories(out_dir);
  parallel_for(images.size(), cfg.threads, [&](std::size_t k) {
    const fs::path map_path = fs::path(maps_dir) / images[k].filename();
    if (!fs::exists(map_path)) throw MissingMap("no map for " + images[k].string());
    const Image image = load_image(images[k].string());
    const SaliencyMap map = load_map(map_path.string());
    const SaliencyMap refined = crf::mean_field_refine(image, map, cfg.crf);
    save_map(refined, (fs::path(out_dir) / images[k].filename()).string());
  });
}

metrics::EvalReport evaluate_dataset(const std::string& preds_dir, const std::string& gts_dir,
                                     const PipelineConfig& cfg,
                                     const std::string& report_prefix) {
  cfg.validate();
  std::vector<fs::path> preds;
  for (const auto& e : fs::directory_iterator(preds_dir))
    if (e.is_regular_file() && e.path().extension() == ".png") preds.push_back(e.path());
  std::sort(preds.begin(), preds.end());
  if (preds.empty()) throw EmptyDataset("no .png predictions in " + preds_dir);

  std::vector<SaliencyMap> pred_maps(preds.size());
  std::vector<SaliencyMap> gt_maps(preds.size());
  parallel_for(preds.size(), cfg.threads, [&](std::size_t k) {
    const fs::path gt_path = fs::path(gts_dir) / preds[k].filename();
    if (!fs::exists(gt_path))
      throw MissingMap("no ground truth for " + preds[k].filename().string());
    pred_maps[k] = load_map(preds[k].string());
    gt_maps[k] = load_map(gt_path.string());
    require_same_size(pred_maps[k].width, pred_maps[k].height, gt_maps[k].width,
                      gt_maps[k].height, preds[k].filename().string());
  });

  metrics::EvalReport report;
  std::vector<SaliencyMap> pr_preds;
  std::vector<BinaryMask> pr_gts;
  double mae_sum = 0.0;
  std::size_t excluded = 0;
  for (std::size_t k = 0; k < preds.size(); ++k) {
    mae_sum += metrics::mae(pred_maps[k], gt_maps[k]);
    BinaryMask mask = binarize(gt_maps[k], 0.5f);
    if (mask.count_positive() == 0) {
      ++excluded;
      continue;
    }
    pr_preds.push_back(std::move(pred_maps[k]));
    pr_gts.push_back(std::move(mask));
  }
  if (pr_preds.empty()) throw EmptyDataset("every ground-truth mask is empty");
  report.curve = metrics::dataset_pr_curve(pr_preds, pr_gts);
  report.max_f = metrics::max_f_measure(report.curve);
  report.mae = mae_sum / static_cast<double>(preds.size());

  metrics::write_report(report, report_prefix + ".txt", report_prefix + ".kv");
  if (excluded > 0) {
    std::ofstream txt(report_prefix + ".txt", std::ios::app);
    txt << "excluded (empty ground truth): " << excluded << "\n";
  }
  return report;
}

}  // namespace asmo::pipeline
