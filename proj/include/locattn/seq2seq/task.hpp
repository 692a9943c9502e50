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

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "locattn/metrics/metrics.hpp"

namespace locattn {

// Synthetic stand-in for text-to-spectrogram data: every input symbol emits
// a run of noisy copies of a symbol-specific pattern, so the ground-truth
// monotonic alignment is known exactly.
struct TaskConfig {
  std::size_t vocab_size = 8;
  std::size_t min_length = 8;
  std::size_t max_length = 16;
  std::size_t min_frames = 2;  // frames emitted per symbol, uniform
  std::size_t max_frames = 4;
  std::size_t feature_dim = 8;
  double noise = 0.05;
  // When positive the last vocabulary entry is a pause that emits
  // near-zero frames and may appear between other symbols.
  double pause_probability = 0.0;
  std::uint64_t seed = 7;  // pattern seed

  void validate() const;
};

struct Example {
  std::vector<int> symbols;
  FeatureSequence frames;
  std::vector<std::size_t> frame_positions;  // encoder index of each frame

  std::size_t decoder_steps(std::size_t frames_per_step) const;
  // Ground-truth encoder index for each decoder step (its first frame).
  std::vector<std::size_t> step_positions(std::size_t frames_per_step) const;
};

class SyntheticTask {
 public:
  explicit SyntheticTask(TaskConfig config);

  const TaskConfig& config() const { return config_; }
  const Frame& pattern(int symbol) const { return patterns_.at(symbol); }
  bool has_pause() const { return config_.pause_probability > 0.0; }

  // Length drawn uniformly from [min_length, max_length].
  Example sample(std::mt19937_64& rng) const;
  Example sample(std::size_t length, std::mt19937_64& rng) const;
  std::vector<Example> sample_set(std::size_t count, std::uint64_t seed) const;

 private:
  TaskConfig config_;
  std::vector<Frame> patterns_;
};

}  // namespace locattn
