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
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace locattn {

using Frame = std::vector<double>;

struct FeatureSequence {
  std::vector<Frame> frames;

  std::size_t size() const { return frames.size(); }
  std::size_t dim() const { return frames.empty() ? 0 : frames[0].size(); }
  // Throws unless nonempty with equal-length frames.
  void validate() const;
};

// Text matrix: one frame per line, whitespace-separated values; blank lines
// and lines starting with '#' are ignored.
void write_features(std::ostream& os, const FeatureSequence& seq);
FeatureSequence read_features(std::istream& is);

// The synthetic features have no cepstral energy term; dimension 0 plays
// that role and is excluded.
inline constexpr std::size_t kMcdFirstDim = 1;

// (10 / ln 10) * sqrt(2 * sum_{d >= first_dim} (a_d - b_d)^2)
double mcd(std::span<const double> a, std::span<const double> b,
           std::size_t first_dim = kMcdFirstDim);

struct DtwResult {
  double total_cost = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> path;
  double normalized_cost = 0.0;  // total_cost / path.size()
};

using FrameCost =
    std::function<double(std::span<const double>, std::span<const double>)>;

// Minimal-cost monotone path from (0, 0) to (N-1, M-1) with steps
// (1,0), (0,1), (1,1). Ties prefer the diagonal, then (1,0).
DtwResult dtw(const FeatureSequence& a, const FeatureSequence& b,
              const FrameCost& cost);

// Path-normalized DTW cost with MCD frame cost; lower is more similar.
double mcd_dtw(const FeatureSequence& a, const FeatureSequence& b);

// Per-decoder-step alignment record.
struct AlignmentTrace {
  std::size_t length = 0;  // encoder length L
  std::vector<std::vector<double>> weights;
  std::vector<std::size_t> peaks;
  bool hit_max_steps = false;

  void push(std::span<const double> alpha);
  std::size_t steps() const { return peaks.size(); }
};

// Proxy for transcription fidelity on long inputs.
//
// Coverage is the final traversal frontier / (L - 1), clamped to [0, 1].
// The frontier starts at position 0 (alpha_0) and follows the peak only
// through moves of 0..kForwardTolerance positions, so a jump over part of
// the sequence (skipped input) does not count as traversed. For a smoothly
// advancing trace this equals final peak / (L - 1).
struct RobustnessScore {
  double coverage = 0.0;
  std::size_t violations = 0;   // steps where the peak moves back by > 2
  std::size_t stalls = 0;       // steps whose peak did not advance over the
                                // previous kStallWindow steps, before the end
};

inline constexpr std::size_t kStallWindow = 3;
inline constexpr std::size_t kBackwardTolerance = 2;
inline constexpr std::size_t kForwardTolerance = 3;

// Traversal frontier after each step, see RobustnessScore.
std::vector<std::size_t> traversal_frontier(std::span<const std::size_t> peaks);

RobustnessScore robustness_score(const AlignmentTrace& trace, std::size_t length);

// Fraction of steps whose peak lies within `tolerance` of the reference
// encoder position for that step. Steps beyond the reference are ignored.
double alignment_accuracy(const AlignmentTrace& trace,
                          std::span<const std::size_t> reference,
                          std::size_t tolerance = 1);

}  // namespace locattn
