// Copyright 2026 The locattn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "locattn/bench/bench.hpp"

namespace locattn {
namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string num(std::size_t v) { return std::to_string(v); }

Entries model_entries(const ModelConfig& c) {
  return {
      {"model.vocab_size", num(c.vocab_size)},
      {"model.embed_dim", num(c.embed_dim)},
      {"model.encoder_dim", num(c.encoder_dim)},
      {"model.attention_rnn_dim", num(c.attention_rnn_dim)},
      {"model.decoder_rnn_dim", num(c.decoder_rnn_dim)},
      {"model.feature_dim", num(c.feature_dim)},
      {"model.frames_per_step", num(c.frames_per_step)},
      {"model.attention_hidden", num(c.attention_hidden)},
      {"model.gmm_components", num(c.gmm_components)},
      {"model.gmm_delta_target", num(c.gmm_delta_target)},
      {"model.gmm_sigma_target", num(c.gmm_sigma_target)},
      {"model.lsa_filters", num(c.lsa_filters)},
      {"model.lsa_width", num(c.lsa_width)},
      {"model.dca_static_filters", num(c.dca_static_filters)},
      {"model.dca_dynamic_filters", num(c.dca_dynamic_filters)},
      {"model.dca_width", num(c.dca_width)},
      {"model.prior_alpha", num(c.prior_alpha)},
      {"model.prior_beta", num(c.prior_beta)},
      {"model.prior_taps", std::to_string(c.prior_taps)},
  };
}

void apply_model(const FlatConfig& f, ModelConfig& c) {
  c.vocab_size = f.get_size("model.vocab_size", c.vocab_size);
  c.embed_dim = f.get_size("model.embed_dim", c.embed_dim);
  c.encoder_dim = f.get_size("model.encoder_dim", c.encoder_dim);
  c.attention_rnn_dim = f.get_size("model.attention_rnn_dim", c.attention_rnn_dim);
  c.decoder_rnn_dim = f.get_size("model.decoder_rnn_dim", c.decoder_rnn_dim);
  c.feature_dim = f.get_size("model.feature_dim", c.feature_dim);
  c.frames_per_step = f.get_size("model.frames_per_step", c.frames_per_step);
  c.attention_hidden = f.get_size("model.attention_hidden", c.attention_hidden);
  c.gmm_components = f.get_size("model.gmm_components", c.gmm_components);
  c.gmm_delta_target = f.get_double("model.gmm_delta_target", c.gmm_delta_target);
  c.gmm_sigma_target = f.get_double("model.gmm_sigma_target", c.gmm_sigma_target);
  c.lsa_filters = f.get_size("model.lsa_filters", c.lsa_filters);
  c.lsa_width = f.get_size("model.lsa_width", c.lsa_width);
  c.dca_static_filters = f.get_size("model.dca_static_filters", c.dca_static_filters);
  c.dca_dynamic_filters = f.get_size("model.dca_dynamic_filters", c.dca_dynamic_filters);
  c.dca_width = f.get_size("model.dca_width", c.dca_width);
  c.prior_alpha = f.get_double("model.prior_alpha", c.prior_alpha);
  c.prior_beta = f.get_double("model.prior_beta", c.prior_beta);
  c.prior_taps = f.get_int("model.prior_taps", c.prior_taps);
}

std::vector<Mechanism> parse_mechanisms(const std::vector<std::string>& names) {
  std::vector<Mechanism> out;
  for (const auto& n : names) out.push_back(parse_mechanism(n));
  return out;
}

}  // namespace

Precision parse_precision(const std::string& text) {
  if (text == "32") return Precision::k32;
  if (text == "64") return Precision::k64;
  throw std::invalid_argument("precision must be 32 or 64, got '" + text + "'");
}

const char* precision_name(Precision p) {
  return p == Precision::k32 ? "32" : "64";
}

void TrialConfig::validate() const {
  if (mechanisms.empty()) {
    throw std::invalid_argument("trials: no mechanisms configured");
  }
  if (seeds == 0) {
    throw std::invalid_argument("trials: seeds must be at least 1");
  }
  if (workers == 0) {
    throw std::invalid_argument("trials: workers must be at least 1");
  }
  if (train.batch_size == 0) {
    throw std::invalid_argument("trials: train.batch_size must be positive");
  }
  task.validate();
  for (Mechanism m : mechanisms) model_for(m).validate();
}

ModelConfig TrialConfig::model_for(Mechanism m) const {
  ModelConfig c = model;
  c.mechanism = m;
  c.vocab_size = task.vocab_size;
  c.feature_dim = task.feature_dim;
  return c;
}

std::vector<std::size_t> SweepConfig::lengths(std::size_t train_max_length) const {
  std::vector<std::size_t> out;
  for (double f : factors) {
    if (!(f > 0.0)) {
      throw std::invalid_argument("sweep factors must be positive");
    }
    const auto len = static_cast<std::size_t>(
        std::llround(f * static_cast<double>(train_max_length)));
    out.push_back(std::max<std::size_t>(len, 1));
  }
  return out;
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = {
        "mechanisms", "seeds", "seed", "workers", "precision", "out_dir",
        "checkpoints",
        "train.steps", "train.batch_size", "train.learning_rate",
        "train.lr_drop_fraction", "train.lr_after_drop", "train.clip_norm",
        "train.eval_interval", "train.eval_samples", "train.eval_seed",
        "train.max_steps_factor",
        "task.vocab_size", "task.min_length", "task.max_length",
        "task.min_frames", "task.max_frames", "task.feature_dim",
        "task.noise", "task.pause_probability", "task.seed",
        "sweep.factors", "sweep.samples", "sweep.seed",
        "sweep.max_steps_factor", "sweep.failure_coverage",
        "rollout.alpha", "rollout.beta", "rollout.taps", "rollout.length",
        "rollout.steps"};
    for (const auto& [key, value] : model_entries(ModelConfig{})) {
      if (key != "model.vocab_size" && key != "model.feature_dim") {
        k.insert(key);
      }
    }
    return k;
  }();
  return keys;
}

TrialConfig trial_config_from(const FlatConfig& f) {
  f.require_known(known_config_keys());
  TrialConfig c;
  if (f.has("mechanisms")) c.mechanisms = parse_mechanisms(f.get_list("mechanisms"));
  c.seeds = f.get_size("seeds", c.seeds);
  c.first_seed = f.get_u64("seed", c.first_seed);
  c.workers = f.get_size("workers", c.workers);
  if (f.has("precision")) c.precision = parse_precision(f.get("precision"));
  c.out_dir = f.get("out_dir", c.out_dir.string());
  c.save_checkpoints = f.get_bool("checkpoints", c.save_checkpoints);

  TrainConfig& t = c.train;
  t.steps = f.get_size("train.steps", t.steps);
  t.batch_size = f.get_size("train.batch_size", t.batch_size);
  t.learning_rate = f.get_double("train.learning_rate", t.learning_rate);
  t.lr_drop_fraction = f.get_double("train.lr_drop_fraction", t.lr_drop_fraction);
  t.lr_after_drop = f.get_double("train.lr_after_drop", t.lr_after_drop);
  t.clip_norm = f.get_double("train.clip_norm", t.clip_norm);
  t.eval_interval = f.get_size("train.eval_interval", t.eval_interval);
  t.eval_samples = f.get_size("train.eval_samples", t.eval_samples);
  t.eval_seed = f.get_u64("train.eval_seed", t.eval_seed);
  t.max_steps_factor = f.get_double("train.max_steps_factor", t.max_steps_factor);

  TaskConfig& k = c.task;
  k.vocab_size = f.get_size("task.vocab_size", k.vocab_size);
  k.min_length = f.get_size("task.min_length", k.min_length);
  k.max_length = f.get_size("task.max_length", k.max_length);
  k.min_frames = f.get_size("task.min_frames", k.min_frames);
  k.max_frames = f.get_size("task.max_frames", k.max_frames);
  k.feature_dim = f.get_size("task.feature_dim", k.feature_dim);
  k.noise = f.get_double("task.noise", k.noise);
  k.pause_probability = f.get_double("task.pause_probability", k.pause_probability);
  k.seed = f.get_u64("task.seed", k.seed);

  apply_model(f, c.model);
  c.validate();
  return c;
}

SweepConfig sweep_config_from(const FlatConfig& f) {
  f.require_known(known_config_keys());
  SweepConfig c;
  if (f.has("sweep.factors")) {
    c.factors.clear();
    for (const auto& item : f.get_list("sweep.factors")) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw std::invalid_argument("sweep.factors: bad number '" + item + "'");
      }
      c.factors.push_back(v);
    }
    if (c.factors.empty()) {
      throw std::invalid_argument("sweep.factors is empty");
    }
  }
  c.samples = f.get_size("sweep.samples", c.samples);
  c.seed = f.get_u64("sweep.seed", c.seed);
  c.max_steps_factor = f.get_double("sweep.max_steps_factor", c.max_steps_factor);
  c.failure_coverage = f.get_double("sweep.failure_coverage", c.failure_coverage);
  if (c.samples == 0) {
    throw std::invalid_argument("sweep.samples must be positive");
  }
  return c;
}

nlohmann::json config_metadata(const FlatConfig& config) {
  nlohmann::json j;
  auto sources = nlohmann::json::array();
  for (const auto& s : config.sources()) {
    sources.push_back({{"path", s.path}, {"text", s.text}});
  }
  j["config_sources"] = std::move(sources);
  auto overrides = nlohmann::json::array();
  for (const auto& [k, v] : config.overrides()) {
    overrides.push_back({{"key", k}, {"value", v}});
  }
  j["config_overrides"] = std::move(overrides);
  j["config_values"] = config.values();
  j["success_rule"] = {
      {"coverage_gt", kSuccessCoverage},
      {"violations_lt", kSuccessMaxViolations},
      {"tracking_ge", kSuccessTracking},
      {"tracking_tolerance", 1},
      {"description",
       "held-out means: traversal coverage > 0.9, fewer than 3 backward "
       "jumps per sample, teacher-forced peak within one position of the "
       "true alignment on at least 90% of steps"}};
  j["robustness_proxy"] =
      "coverage, violations and stalls are synthetic transcription-fidelity "
      "proxies computed from the attention peak, not a character error rate";
  return j;
}

template <typename Real>
void save_checkpoint(const Model<Real>& model, const std::filesystem::path& path,
                     const Entries& extra_meta) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << "locattn-checkpoint 1\n";
    out << "meta mechanism " << mechanism_name(model.config().mechanism) << '\n';
    out << "meta trained_steps " << model.trained_steps() << '\n';
    out << "meta precision " << (sizeof(Real) == 4 ? "32" : "64") << '\n';
    for (const auto& [k, v] : model_entries(model.config())) {
      out << "meta " << k << ' ' << v << '\n';
    }
    for (const auto& [k, v] : extra_meta) {
      out << "meta " << k << ' ' << v << '\n';
    }
    char buf[32];
    for (const auto& p : model.params()) {
      out << "param " << p.name << ' ' << p.value.rank();
      for (std::size_t d : p.value.shape()) out << ' ' << d;
      out << '\n';
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g",
                      static_cast<double>(p.value[i]));
        out << (i ? " " : "") << buf;
      }
      out << '\n';
    }
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

struct ParsedCheckpoint {
  CheckpointInfo info;
  std::vector<std::pair<std::string, std::pair<Shape, std::vector<double>>>> params;
};

ParsedCheckpoint parse_checkpoint(const std::filesystem::path& path,
                                  bool with_params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "locattn-checkpoint 1") {
    throw std::invalid_argument(path.string() + ": not a locattn checkpoint");
  }
  ParsedCheckpoint out;
  FlatConfig model_keys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      out.info.meta[key] = value;
      if (key.rfind("model.", 0) == 0) model_keys.set(key, value);
    } else if (tag == "param") {
      std::string name;
      std::size_t rank = 0;
      ls >> name >> rank;
      Shape shape(rank);
      for (auto& d : shape) ls >> d;
      if (!ls) throw std::invalid_argument(path.string() + ": bad param line");
      std::string data;
      std::getline(in, data);
      if (!with_params) continue;
      std::vector<double> values;
      values.reserve(shape_size(shape));
      std::istringstream ds(data);
      double v = 0.0;
      while (ds >> v) values.push_back(v);
      if (values.size() != shape_size(shape)) {
        throw std::invalid_argument(path.string() + ": parameter " + name +
                                    " has wrong element count");
      }
      out.params.emplace_back(name, std::make_pair(shape, std::move(values)));
    } else {
      throw std::invalid_argument(path.string() + ": unknown record " + tag);
    }
  }
  auto it = out.info.meta.find("mechanism");
  if (it == out.info.meta.end()) {
    throw std::invalid_argument(path.string() + ": missing mechanism");
  }
  out.info.config.mechanism = parse_mechanism(it->second);
  apply_model(model_keys, out.info.config);
  out.info.config.validate();
  if (auto st = out.info.meta.find("trained_steps"); st != out.info.meta.end()) {
    out.info.trained_steps = std::stoull(st->second);
  }
  return out;
}

}  // namespace

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  return parse_checkpoint(path, false).info;
}

template <typename Real>
std::unique_ptr<Model<Real>> load_checkpoint(const std::filesystem::path& path) {
  ParsedCheckpoint parsed = parse_checkpoint(path, true);
  auto model = std::make_unique<Model<Real>>(parsed.info.config, 0);
  std::size_t loaded = 0;
  for (auto& [name, data] : parsed.params) {
    Parameter<Real>* p = model->params().find(name);
    if (!p) {
      throw std::invalid_argument(path.string() + ": unexpected parameter " + name);
    }
    if (p->value.shape() != data.first) {
      throw std::invalid_argument(path.string() + ": parameter " + name +
                                  " has shape " + shape_string(data.first) +
                                  ", model expects " +
                                  shape_string(p->value.shape()));
    }
    for (std::size_t i = 0; i < data.second.size(); ++i) {
      p->value[i] = static_cast<Real>(data.second[i]);
    }
    ++loaded;
  }
  if (loaded != model->params().count()) {
    throw std::invalid_argument(path.string() + ": checkpoint is missing parameters");
  }
  model->set_trained_steps(parsed.info.trained_steps);
  return model;
}

template void save_checkpoint(const Model<float>&, const std::filesystem::path&,
                              const Entries&);
template void save_checkpoint(const Model<double>&, const std::filesystem::path&,
                              const Entries&);
template std::unique_ptr<Model<float>> load_checkpoint(const std::filesystem::path&);
template std::unique_ptr<Model<double>> load_checkpoint(const std::filesystem::path&);

}  // namespace locattn
