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

#include "locattn/seq2seq/task.hpp"

#include <stdexcept>

namespace locattn {

void TaskConfig::validate() const {
  const bool pauses = pause_probability > 0.0;
  if (vocab_size < (pauses ? 2u : 1u)) {
    throw std::invalid_argument("TaskConfig: vocabulary too small");
  }
  if (min_length == 0 || min_length > max_length) {
    throw std::invalid_argument("TaskConfig: bad length range");
  }
  if (min_frames == 0 || min_frames > max_frames) {
    throw std::invalid_argument("TaskConfig: bad frames-per-symbol range");
  }
  if (feature_dim < 2) {
    throw std::invalid_argument("TaskConfig: feature_dim must be >= 2");
  }
  if (noise < 0.0 || pause_probability < 0.0 || pause_probability >= 1.0) {
    throw std::invalid_argument("TaskConfig: bad noise or pause probability");
  }
}

std::size_t Example::decoder_steps(std::size_t frames_per_step) const {
  return (frames.size() + frames_per_step - 1) / frames_per_step;
}

std::vector<std::size_t> Example::step_positions(
    std::size_t frames_per_step) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < frame_positions.size(); f += frames_per_step) {
    out.push_back(frame_positions[f]);
  }
  return out;
}

SyntheticTask::SyntheticTask(TaskConfig config) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  patterns_.resize(config_.vocab_size);
  for (std::size_t s = 0; s < config_.vocab_size; ++s) {
    patterns_[s].resize(config_.feature_dim);
    for (double& v : patterns_[s]) {
      v = unit(rng);
    }
  }
  if (has_pause()) {
    std::fill(patterns_.back().begin(), patterns_.back().end(), 0.0);
  }
}

Example SyntheticTask::sample(std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> len(config_.min_length,
                                                 config_.max_length);
  return sample(len(rng), rng);
}

Example SyntheticTask::sample(std::size_t length, std::mt19937_64& rng) const {
  if (length == 0) {
    throw std::invalid_argument("SyntheticTask: length must be positive");
  }
  const std::size_t spoken = config_.vocab_size - (has_pause() ? 1 : 0);
  std::uniform_int_distribution<int> symbol(0, static_cast<int>(spoken) - 1);
  std::uniform_int_distribution<std::size_t> frames(config_.min_frames,
                                                    config_.max_frames);
  std::bernoulli_distribution pause(config_.pause_probability);
  std::normal_distribution<double> noise(0.0, 1.0);

  Example ex;
  ex.symbols.reserve(length);
  for (std::size_t j = 0; j < length; ++j) {
    const bool inner = j > 0 && j + 1 < length;
    if (has_pause() && inner && pause(rng)) {
      ex.symbols.push_back(static_cast<int>(config_.vocab_size) - 1);
    } else {
      ex.symbols.push_back(symbol(rng));
    }
  }
  const int pause_id = has_pause() ? static_cast<int>(config_.vocab_size) - 1 : -1;
  for (std::size_t j = 0; j < length; ++j) {
    const Frame& p = patterns_[ex.symbols[j]];
    const double scale = ex.symbols[j] == pause_id ? 0.1 : 1.0;
    const std::size_t n = frames(rng);
    for (std::size_t f = 0; f < n; ++f) {
      Frame frame(p.size());
      for (std::size_t d = 0; d < p.size(); ++d) {
        frame[d] = p[d] + scale * config_.noise * noise(rng);
      }
      ex.frames.frames.push_back(std::move(frame));
      ex.frame_positions.push_back(j);
    }
  }
  return ex;
}

std::vector<Example> SyntheticTask::sample_set(std::size_t count,
                                               std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<Example> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(sample(rng));
  }
  return out;
}

}  // namespace locattn
