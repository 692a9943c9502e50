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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "locattn/attention/attention.hpp"
#include "locattn/bench/config.hpp"
#include "locattn/bench/results.hpp"
#include "locattn/seq2seq/model.hpp"
#include "locattn/seq2seq/task.hpp"
#include "locattn/seq2seq/trainer.hpp"

namespace locattn {

enum class Precision { k32, k64 };

Precision parse_precision(const std::string& text);  // "32" or "64"
const char* precision_name(Precision p);

struct TrialConfig {
  std::vector<Mechanism> mechanisms{kAllMechanisms.begin(),
                                    kAllMechanisms.end()};
  std::size_t seeds = 10;
  std::uint64_t first_seed = 0;
  TrainConfig train;
  TaskConfig task;
  ModelConfig model;  // mechanism, vocab and feature sizes are set per run
  Precision precision = Precision::k64;
  std::size_t workers = 1;
  bool save_checkpoints = true;
  std::filesystem::path out_dir = "locattn_out";

  void validate() const;
  ModelConfig model_for(Mechanism m) const;
};

struct SweepConfig {
  // Lengths as multiples of the training maximum, rounded to integers.
  std::vector<double> factors{1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0};
  std::size_t samples = 8;
  std::uint64_t seed = 99;
  double max_steps_factor = 3.0;
  // Mean coverage below this marks the failure onset of a mechanism.
  double failure_coverage = 0.5;

  std::vector<std::size_t> lengths(std::size_t train_max_length) const;
};

// Every key understood by trial_config_from / sweep_config_from.
const std::set<std::string>& known_config_keys();
TrialConfig trial_config_from(const FlatConfig& config);
SweepConfig sweep_config_from(const FlatConfig& config);

// Provenance block written into every output: verbatim config sources,
// command-line overrides, resolved values and the success rule.
nlohmann::json config_metadata(const FlatConfig& config);

// Per-run outcome of run_trials.
struct RunSummary {
  Mechanism mechanism = Mechanism::kCba;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | diverged | failed
  std::string error;
  std::size_t steps_completed = 0;
  std::optional<std::size_t> first_success_step;
  double mcd_initial = 0.0;  // held-out MCD-DTW at step 0
  std::optional<double> mcd_at_success;
  double mcd_final = 0.0;
  double wall_time_s = 0.0;
  std::filesystem::path checkpoint;
};

struct TrialOutcome {
  ResultTable evals;  // one row per (mechanism, seed, scheduled eval)
  ResultTable runs;   // one row per (mechanism, seed)
  std::vector<RunSummary> summaries;  // ordered like config.mechanisms x seeds
};

const std::vector<std::string>& trial_eval_columns();
const std::vector<std::string>& trial_run_columns();

// Trains every (mechanism, seed) pair in a worker pool, appending eval rows
// to <out_dir>/trials_evals.csv as they arrive. A diverging or throwing run
// is recorded as failed without stopping the batch. Unknown mechanisms are
// rejected by validate() before any training starts.
TrialOutcome run_trials(const TrialConfig& config,
                        const nlohmann::json& metadata = {});

// Checkpoints: a portable text file of name-shape-data triples.
//
//   locattn-checkpoint 1
//   meta <key> <value>          model.* settings, mechanism, trained_steps, ...
//   param <name> <rank> <dims...>
//   <values, space separated>
template <typename Real>
void save_checkpoint(const Model<Real>& model, const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, std::string>>&
                         extra_meta = {});

struct CheckpointInfo {
  ModelConfig config;
  std::uint64_t trained_steps = 0;
  std::map<std::string, std::string> meta;
};

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

template <typename Real>
std::unique_ptr<Model<Real>> load_checkpoint(const std::filesystem::path& path);

template <typename Real>
struct SweepModel {
  Mechanism mechanism = Mechanism::kCba;
  std::uint64_t seed = 0;
  Model<Real>* model = nullptr;
};

const std::vector<std::string>& sweep_columns();

// Free-running evaluation of trained models at the given input lengths, one
// row per (model, length, sample). Throws std::invalid_argument if a model
// has no training steps. `train_max_length` marks the training boundary.
template <typename Real>
ResultTable run_length_sweep(const std::vector<SweepModel<Real>>& models,
                             const SyntheticTask& task,
                             std::size_t train_max_length,
                             const std::vector<std::size_t>& lengths,
                             const SweepConfig& config);

struct SweepSummaryRow {
  std::string mechanism;
  std::size_t length = 0;
  double mean_coverage = 0.0;
  double mean_violations = 0.0;
};

std::vector<SweepSummaryRow> summarize_sweep(const ResultTable& sweep);

// First length whose mean coverage falls below `threshold`, if any.
std::optional<std::size_t> failure_onset(
    const std::vector<SweepSummaryRow>& summary, const std::string& mechanism,
    double threshold);

ResultTable sweep_summary_table(const std::vector<SweepSummaryRow>& summary,
                                double threshold);

}  // namespace locattn
