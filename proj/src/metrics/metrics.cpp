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

#include "locattn/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace locattn {

void FeatureSequence::validate() const {
  if (frames.empty()) {
    throw std::invalid_argument("FeatureSequence: empty");
  }
  const std::size_t d = frames[0].size();
  for (const auto& f : frames) {
    if (f.size() != d) {
      throw std::invalid_argument("FeatureSequence: inconsistent frame size");
    }
  }
}

void write_features(std::ostream& os, const FeatureSequence& seq) {
  seq.validate();
  os << "# frames " << seq.size() << " dim " << seq.dim() << '\n';
  os << std::setprecision(17);
  for (const auto& f : seq.frames) {
    for (std::size_t d = 0; d < f.size(); ++d) {
      os << (d ? " " : "") << f[d];
    }
    os << '\n';
  }
}

FeatureSequence read_features(std::istream& is) {
  FeatureSequence seq;
  std::string line;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream ls(line);
    Frame f;
    double v = 0.0;
    while (ls >> v) {
      f.push_back(v);
    }
    if (!ls.eof()) {
      throw std::invalid_argument("read_features: malformed line: " + line);
    }
    seq.frames.push_back(std::move(f));
  }
  seq.validate();
  return seq;
}

double mcd(std::span<const double> a, std::span<const double> b,
           std::size_t first_dim) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("mcd: frame dimension mismatch");
  }
  double sq = 0.0;
  for (std::size_t d = first_dim; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sq += diff * diff;
  }
  return (10.0 / std::numbers::ln10) * std::sqrt(2.0 * sq);
}

DtwResult dtw(const FeatureSequence& a, const FeatureSequence& b,
              const FrameCost& cost) {
  if (a.frames.empty() || b.frames.empty()) {
    throw std::invalid_argument("dtw: empty sequence");
  }
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost(a.frames[i], b.frames[j]);
      if (i == 0 && j == 0) {
        at(i, j) = c;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = at(i - 1, j - 1);
      if (i > 0) best = std::min(best, at(i - 1, j));
      if (j > 0) best = std::min(best, at(i, j - 1));
      at(i, j) = best + c;
    }
  }

  DtwResult result;
  result.total_cost = at(n - 1, m - 1);
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  result.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = at(i - 1, j - 1);
      const double up = at(i - 1, j);
      const double left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());
  result.normalized_cost =
      result.total_cost / static_cast<double>(result.path.size());
  return result;
}

double mcd_dtw(const FeatureSequence& a, const FeatureSequence& b) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("mcd_dtw: frame dimension mismatch");
  }
  return dtw(a, b, [](std::span<const double> x, std::span<const double> y) {
           return mcd(x, y);
         }).normalized_cost;
}

void AlignmentTrace::push(std::span<const double> alpha) {
  if (alpha.empty()) {
    throw std::invalid_argument("AlignmentTrace: empty alignment");
  }
  if (length == 0) {
    length = alpha.size();
  } else if (alpha.size() != length) {
    throw std::invalid_argument("AlignmentTrace: alignment length changed");
  }
  weights.emplace_back(alpha.begin(), alpha.end());
  peaks.push_back(static_cast<std::size_t>(
      std::max_element(alpha.begin(), alpha.end()) - alpha.begin()));
}

std::vector<std::size_t> traversal_frontier(std::span<const std::size_t> peaks) {
  std::vector<std::size_t> out;
  out.reserve(peaks.size());
  std::size_t frontier = 0;
  for (std::size_t p : peaks) {
    if (p >= frontier && p <= frontier + kForwardTolerance) {
      frontier = p;
    }
    out.push_back(frontier);
  }
  return out;
}

RobustnessScore robustness_score(const AlignmentTrace& trace,
                                 std::size_t length) {
  if (trace.peaks.empty()) {
    throw std::invalid_argument("robustness_score: empty trace");
  }
  if (length == 0) {
    throw std::invalid_argument("robustness_score: zero encoder length");
  }
  RobustnessScore s;
  const auto last =
      static_cast<double>(traversal_frontier(trace.peaks).back());
  s.coverage =
      length == 1 ? 1.0 : std::clamp(last / static_cast<double>(length - 1), 0.0, 1.0);
  const auto& p = trace.peaks;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] + kBackwardTolerance < p[i - 1]) {
      ++s.violations;
    }
    if (i >= kStallWindow && p[i] + 1 < length && p[i] <= p[i - kStallWindow]) {
      ++s.stalls;
    }
  }
  return s;
}

double alignment_accuracy(const AlignmentTrace& trace,
                          std::span<const std::size_t> reference,
                          std::size_t tolerance) {
  const std::size_t n = std::min(trace.peaks.size(), reference.size());
  if (n == 0) {
    return 0.0;
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = trace.peaks[i];
    const std::size_t b = reference[i];
    if ((a > b ? a - b : b - a) <= tolerance) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace locattn
