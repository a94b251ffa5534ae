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

#include "asmo/config.hpp"

#include <fstream>
#include <sstream>

namespace asmo::pipeline {

void PipelineConfig::validate() const {
  if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (!(stop_mean_mae >= 0.0 && stop_mean_mae <= 1.0))
    throw ConfigError("stop_mean_mae must lie in [0,1]");
  if (cam_top_k_stage1 < 1 || cam_top_k_stage1 > net.n_classes)
    throw ConfigError("cam_top_k_stage1 must lie in [1, n_classes]");
  if (cam_top_k_stage2 < 1 || cam_top_k_stage2 > net.n_classes)
    throw ConfigError("cam_top_k_stage2 must lie in [1, n_classes]");
  if (!(binarize_threshold >= 0.0 && binarize_threshold <= 1.0))
    throw ConfigError("binarize_threshold must lie in [0,1]");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation_fraction must lie in (0,1)");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  crf.validate();
  thresholds.validate();
  train.validate();
  net.validate();
  seed.validate();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' needs an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' needs a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "' needs a boolean, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_double(key, trim(tok)));
  if (out.empty()) throw ConfigError("key '" + key + "' needs a non-empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_int(key, trim(tok)));
  if (out.empty()) throw ConfigError("key '" + key + "' needs a non-empty list");
  return out;
}

}  // namespace

void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "max_rounds") cfg.max_rounds = parse_int(key, value);
  else if (key == "stop_mean_mae") cfg.stop_mean_mae = parse_double(key, value);
  else if (key == "cam_top_k_stage1") cfg.cam_top_k_stage1 = parse_int(key, value);
  else if (key == "cam_top_k_stage2") cfg.cam_top_k_stage2 = parse_int(key, value);
  else if (key == "binarize_threshold") cfg.binarize_threshold = parse_double(key, value);
  else if (key == "validation_fraction") cfg.validation_fraction = parse_double(key, value);
  else if (key == "threads") cfg.threads = parse_int(key, value);
  else if (key == "crf.iterations") cfg.crf.iterations = parse_int(key, value);
  else if (key == "crf.w_bilateral") cfg.crf.w_bilateral = parse_double(key, value);
  else if (key == "crf.w_spatial") cfg.crf.w_spatial = parse_double(key, value);
  else if (key == "crf.theta_alpha") cfg.crf.theta_alpha = parse_double(key, value);
  else if (key == "crf.theta_beta") cfg.crf.theta_beta = parse_double(key, value);
  else if (key == "crf.theta_gamma") cfg.crf.theta_gamma = parse_double(key, value);
  else if (key == "crf.unary_clamp") cfg.crf.unary_clamp = parse_double(key, value);
  else if (key == "thresholds.alpha") cfg.thresholds.alpha = parse_double(key, value);
  else if (key == "thresholds.beta") cfg.thresholds.beta = parse_double(key, value);
  else if (key == "train.learning_rate") cfg.train.learning_rate = parse_double(key, value);
  else if (key == "train.momentum") cfg.train.momentum = parse_double(key, value);
  else if (key == "train.weight_decay") cfg.train.weight_decay = parse_double(key, value);
  else if (key == "train.minibatch") cfg.train.minibatch = parse_int(key, value);
  else if (key == "train.loss_accumulation") cfg.train.loss_accumulation = parse_int(key, value);
  else if (key == "train.iterations_per_round")
    cfg.train.iterations_per_round = parse_int(key, value);
  else if (key == "train.rng_seed")
    cfg.train.rng_seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "train.validation_interval")
    cfg.train.validation_interval = parse_int(key, value);
  else if (key == "net.scales") cfg.net.scales = parse_double_list(key, value);
  else if (key == "net.backbone_channels") cfg.net.backbone_channels = parse_int_list(key, value);
  else if (key == "net.n_classes") cfg.net.n_classes = parse_int(key, value);
  else if (key == "net.feature_stride") cfg.net.feature_stride = parse_int(key, value);
  else if (key == "seed.passes") cfg.seed.passes = parse_int(key, value);
  else if (key == "seed.use_boundary_seeds")
    cfg.seed.use_boundary_seeds = parse_bool(key, value);
  else if (key == "seed.post_blur_radius") cfg.seed.post_blur_radius = parse_int(key, value);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    apply_config_line(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create config " + path);
  out << "max_rounds = " << cfg.max_rounds << "\n";
  out << "stop_mean_mae = " << cfg.stop_mean_mae << "\n";
  out << "cam_top_k_stage1 = " << cfg.cam_top_k_stage1 << "\n";
  out << "cam_top_k_stage2 = " << cfg.cam_top_k_stage2 << "\n";
  out << "binarize_threshold = " << cfg.binarize_threshold << "\n";
  out << "validation_fraction = " << cfg.validation_fraction << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "crf.iterations = " << cfg.crf.iterations << "\n";
  out << "crf.w_bilateral = " << cfg.crf.w_bilateral << "\n";
  out << "crf.w_spatial = " << cfg.crf.w_spatial << "\n";
  out << "crf.theta_alpha = " << cfg.crf.theta_alpha << "\n";
  out << "crf.theta_beta = " << cfg.crf.theta_beta << "\n";
  out << "crf.theta_gamma = " << cfg.crf.theta_gamma << "\n";
  out << "crf.unary_clamp = " << cfg.crf.unary_clamp << "\n";
  out << "thresholds.alpha = " << cfg.thresholds.alpha << "\n";
  out << "thresholds.beta = " << cfg.thresholds.beta << "\n";
  out << "train.learning_rate = " << cfg.train.learning_rate << "\n";
  out << "train.momentum = " << cfg.train.momentum << "\n";
  out << "train.weight_decay = " << cfg.train.weight_decay << "\n";
  out << "train.minibatch = " << cfg.train.minibatch << "\n";
  out << "train.loss_accumulation = " << cfg.train.loss_accumulation << "\n";
  out << "train.iterations_per_round = " << cfg.train.iterations_per_round << "\n";
  out << "train.rng_seed = " << cfg.train.rng_seed << "\n";
  out << "train.validation_interval = " << cfg.train.validation_interval << "\n";
  out << "net.scales = ";
  for (std::size_t i = 0; i < cfg.net.scales.size(); ++i)
    out << (i ? "," : "") << cfg.net.scales[i];
  out << "\n";
  out << "net.backbone_channels = ";
  for (std::size_t i = 0; i < cfg.net.backbone_channels.size(); ++i)
    out << (i ? "," : "") << cfg.net.backbone_channels[i];
  out << "\n";
  out << "net.n_classes = " << cfg.net.n_classes << "\n";
  out << "net.feature_stride = " << cfg.net.feature_stride << "\n";
  out << "seed.passes = " << cfg.seed.passes << "\n";
  out << "seed.use_boundary_seeds = " << (cfg.seed.use_boundary_seeds ? "true" : "false")
      << "\n";
  out << "seed.post_blur_radius = " << cfg.seed.post_blur_radius << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace asmo::pipeline
