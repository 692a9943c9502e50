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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>

#include "locattn/bench/bench.hpp"

namespace locattn {
namespace {

using Clock = std::chrono::steady_clock;
using Row = std::vector<Cell>;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Cell count_cell(std::size_t v) { return static_cast<std::int64_t>(v); }

Row eval_row(Mechanism m, std::uint64_t seed, const EvalRecord& r,
             const char* status, double wall) {
  return {std::string(mechanism_name(m)),
          count_cell(seed),
          count_cell(r.step),
          std::string(status),
          real_cell(r.train_loss),
          real_cell(r.mcd_dtw),
          real_cell(r.coverage),
          real_cell(r.violations),
          real_cell(r.stalls),
          real_cell(r.tracking),
          r.success,
          real_cell(wall)};
}

Row missing_eval_row(Mechanism m, std::uint64_t seed, std::size_t step,
                     const std::string& status) {
  Row row(trial_eval_columns().size());
  row[0] = std::string(mechanism_name(m));
  row[1] = count_cell(seed);
  row[2] = count_cell(step);
  row[3] = status;
  return row;
}

std::vector<std::size_t> scheduled_evals(const TrainConfig& t) {
  std::vector<std::size_t> steps;
  if (t.eval_interval == 0) return steps;
  for (std::size_t s = 0; s <= t.steps; s += t.eval_interval) steps.push_back(s);
  if (steps.back() != t.steps) steps.push_back(t.steps);
  return steps;
}

template <typename Real>
RunSummary run_one(const TrialConfig& config, const SyntheticTask& task,
                   Mechanism mechanism, std::uint64_t seed,
                   CsvAppender& appender, std::vector<Row>& rows) {
  RunSummary summary;
  summary.mechanism = mechanism;
  summary.seed = seed;
  const auto start = Clock::now();
  std::size_t next_eval = 0;
  const std::vector<std::size_t> schedule = scheduled_evals(config.train);
  try {
    Model<Real> model(config.model_for(mechanism), seed);
    TrainConfig train_config = config.train;
    train_config.seed = seed;
    bool first = true;
    auto on_eval = [&](const EvalRecord& r) {
      Row row = eval_row(mechanism, seed, r, "ok", seconds_since(start));
      appender.append(row);
      rows.push_back(std::move(row));
      ++next_eval;
      if (first) summary.mcd_initial = r.mcd_dtw;
      first = false;
      summary.mcd_final = r.mcd_dtw;
      if (r.success && !summary.first_success_step) {
        summary.first_success_step = r.step;
        summary.mcd_at_success = r.mcd_dtw;
      }
    };
    TrainResult result = train(model, task, train_config, on_eval);
    summary.steps_completed = result.steps_completed;
    if (result.diverged) {
      summary.status = "diverged";
      summary.error = result.failure;
    } else if (config.save_checkpoints) {
      summary.checkpoint = config.out_dir / "checkpoints" /
                           (std::string(mechanism_name(mechanism)) + "_seed" +
                            std::to_string(seed) + ".ckpt");
      save_checkpoint(model, summary.checkpoint,
                      {{"seed", std::to_string(seed)},
                       {"task.max_length", std::to_string(task.config().max_length)},
                       {"task.seed", std::to_string(task.config().seed)}});
    }
  } catch (const std::exception& e) {
    summary.status = "failed";
    summary.error = e.what();
  }
  for (; next_eval < schedule.size(); ++next_eval) {
    Row row = missing_eval_row(mechanism, seed, schedule[next_eval], summary.status);
    appender.append(row);
    rows.push_back(std::move(row));
  }
  summary.wall_time_s = seconds_since(start);
  return summary;
}

Row run_row(const RunSummary& s) {
  Cell success_step = std::monostate{};
  if (s.first_success_step) success_step = count_cell(*s.first_success_step);
  Cell at_success = std::monostate{};
  if (s.mcd_at_success) at_success = real_cell(*s.mcd_at_success);
  Cell checkpoint = std::monostate{};
  if (!s.checkpoint.empty()) checkpoint = s.checkpoint.string();
  Cell error = std::monostate{};
  if (!s.error.empty()) error = s.error;
  return {std::string(mechanism_name(s.mechanism)),
          count_cell(s.seed),
          s.status,
          error,
          count_cell(s.steps_completed),
          success_step,
          real_cell(s.mcd_initial),
          at_success,
          real_cell(s.mcd_final),
          real_cell(s.wall_time_s),
          checkpoint};
}

}  // namespace

const std::vector<std::string>& trial_eval_columns() {
  static const std::vector<std::string> cols = {
      "mechanism", "seed",  "step",     "status",  "train_loss", "mcd_dtw",
      "coverage",  "violations", "stalls", "tracking", "success", "wall_time_s"};
  return cols;
}

const std::vector<std::string>& trial_run_columns() {
  static const std::vector<std::string> cols = {
      "mechanism",          "seed",        "status",         "error",
      "steps_completed",    "first_success_step", "mcd_initial",
      "mcd_at_success",     "mcd_final",   "wall_time_s",    "checkpoint"};
  return cols;
}

TrialOutcome run_trials(const TrialConfig& config, const nlohmann::json& metadata) {
  config.validate();
  const SyntheticTask task(config.task);
  std::filesystem::create_directories(config.out_dir);
  CsvAppender appender(config.out_dir / "trials_evals.csv", trial_eval_columns());

  struct Job {
    Mechanism mechanism;
    std::uint64_t seed;
    RunSummary summary;
    std::vector<Row> rows;
  };
  std::vector<Job> jobs;
  for (Mechanism m : config.mechanisms) {
    for (std::size_t s = 0; s < config.seeds; ++s) {
      jobs.push_back({m, config.first_seed + s, {}, {}});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      job.summary =
          config.precision == Precision::k32
              ? run_one<float>(config, task, job.mechanism, job.seed, appender, job.rows)
              : run_one<double>(config, task, job.mechanism, job.seed, appender, job.rows);
    }
  };
  const std::size_t threads = std::min(config.workers, jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  TrialOutcome outcome;
  outcome.evals.kind = "trials_evals";
  outcome.evals.columns = trial_eval_columns();
  outcome.runs.kind = "trials_runs";
  outcome.runs.columns = trial_run_columns();
  nlohmann::json meta = metadata.is_object() ? metadata : nlohmann::json::object();
  meta["precision"] = precision_name(config.precision);
  meta["train_steps"] = config.train.steps;
  meta["eval_interval"] = config.train.eval_interval;
  outcome.evals.metadata = meta;
  outcome.runs.metadata = meta;
  for (Job& job : jobs) {
    for (Row& row : job.rows) outcome.evals.add_row(std::move(row));
    outcome.runs.add_row(run_row(job.summary));
    outcome.summaries.push_back(std::move(job.summary));
  }
  return outcome;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "mechanism",  "seed",       "train_max_length", "length",
      "length_ratio", "beyond_training", "sample",     "coverage",
      "violations", "stalls",     "decoder_steps",    "hit_max_steps"};
  return cols;
}

template <typename Real>
ResultTable run_length_sweep(const std::vector<SweepModel<Real>>& models,
                             const SyntheticTask& task,
                             std::size_t train_max_length,
                             const std::vector<std::size_t>& lengths,
                             const SweepConfig& config) {
  if (models.empty() || lengths.empty()) {
    throw std::invalid_argument("run_length_sweep: no models or lengths");
  }
  if (train_max_length == 0) {
    throw std::invalid_argument("run_length_sweep: train_max_length is zero");
  }
  for (const auto& m : models) {
    if (!m.model) throw std::invalid_argument("run_length_sweep: null model");
    if (m.model->trained_steps() == 0) {
      throw std::invalid_argument(std::string("run_length_sweep: ") +
                                  std::string(mechanism_name(m.mechanism)) + " seed " +
                                  std::to_string(m.seed) + " is untrained");
    }
  }
  ResultTable table;
  table.kind = "length_sweep";
  table.columns = sweep_columns();
  table.metadata["train_max_length"] = train_max_length;
  table.metadata["failure_coverage"] = config.failure_coverage;
  for (std::size_t length : lengths) {
    // Every model sees the same inputs at a given length.
    std::mt19937_64 rng(config.seed + length);
    std::vector<Example> inputs;
    for (std::size_t s = 0; s < config.samples; ++s) {
      inputs.push_back(task.sample(length, rng));
    }
    for (const auto& m : models) {
      const std::size_t r = m.model->config().frames_per_step;
      for (std::size_t s = 0; s < inputs.size(); ++s) {
        const Example& ex = inputs[s];
        const auto budget = static_cast<std::size_t>(std::ceil(
            config.max_steps_factor * static_cast<double>(ex.decoder_steps(r))));
        Generation gen = m.model->generate(ex.symbols, std::max<std::size_t>(budget, 1));
        const RobustnessScore score = robustness_score(gen.trace, length);
        table.add_row({std::string(mechanism_name(m.mechanism)),
                       count_cell(m.seed),
                       count_cell(train_max_length),
                       count_cell(length),
                       static_cast<double>(length) / static_cast<double>(train_max_length),
                       length > train_max_length,
                       count_cell(s),
                       score.coverage,
                       count_cell(score.violations),
                       count_cell(score.stalls),
                       count_cell(gen.trace.peaks.size()),
                       gen.trace.hit_max_steps});
      }
    }
  }
  return table;
}

std::vector<SweepSummaryRow> summarize_sweep(const ResultTable& sweep) {
  struct Acc {
    double coverage = 0.0;
    double violations = 0.0;
    std::size_t n = 0;
  };
  std::vector<std::pair<std::string, std::size_t>> order;
  std::map<std::pair<std::string, std::size_t>, Acc> acc;
  const std::size_t c_mech = sweep.column("mechanism");
  const std::size_t c_len = sweep.column("length");
  const std::size_t c_cov = sweep.column("coverage");
  const std::size_t c_viol = sweep.column("violations");
  for (const auto& row : sweep.rows) {
    const auto key = std::make_pair(std::get<std::string>(row[c_mech]),
                                    static_cast<std::size_t>(std::get<std::int64_t>(row[c_len])));
    auto [it, inserted] = acc.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.coverage += std::get<double>(row[c_cov]);
    it->second.violations += static_cast<double>(std::get<std::int64_t>(row[c_viol]));
    ++it->second.n;
  }
  std::vector<SweepSummaryRow> out;
  for (const auto& key : order) {
    const Acc& a = acc.at(key);
    const auto n = static_cast<double>(a.n);
    out.push_back({key.first, key.second, a.coverage / n, a.violations / n});
  }
  return out;
}

std::optional<std::size_t> failure_onset(const std::vector<SweepSummaryRow>& summary,
                                         const std::string& mechanism,
                                         double threshold) {
  std::optional<std::size_t> onset;
  for (const auto& row : summary) {
    if (row.mechanism == mechanism && row.mean_coverage < threshold &&
        (!onset || row.length < *onset)) {
      onset = row.length;
    }
  }
  return onset;
}

ResultTable sweep_summary_table(const std::vector<SweepSummaryRow>& summary,
                                double threshold) {
  ResultTable table;
  table.kind = "length_sweep_summary";
  table.columns = {"mechanism", "length", "mean_coverage", "mean_violations",
                   "failure_onset"};
  table.metadata["failure_coverage"] = threshold;
  for (const auto& row : summary) {
    Cell onset = std::monostate{};
    if (auto o = failure_onset(summary, row.mechanism, threshold)) {
      onset = count_cell(*o);
    }
    table.add_row({row.mechanism, count_cell(row.length), row.mean_coverage,
                   row.mean_violations, onset});
  }
  return table;
}

template ResultTable run_length_sweep(const std::vector<SweepModel<float>>&,
                                      const SyntheticTask&, std::size_t,
                                      const std::vector<std::size_t>&,
                                      const SweepConfig&);
template ResultTable run_length_sweep(const std::vector<SweepModel<double>>&,
                                      const SyntheticTask&, std::size_t,
                                      const std::vector<std::size_t>&,
                                      const SweepConfig&);

}  // namespace locattn
