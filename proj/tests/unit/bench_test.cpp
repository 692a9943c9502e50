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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "locattn/bench/bench.hpp"
#include "locattn/bench/gradcheck.hpp"

namespace locattn {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("locattn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

TEST(FlatConfig, ParsesIncludesAndOverrides) {
  TempDir dir;
  write_file(dir.path() / "base.cfg", "# shared\ntrain.steps = 100\nseeds = 2\n");
  write_file(dir.path() / "main.cfg", "include base.cfg\nseeds = 3\nmechanisms = DCA, gmmv2b\n");
  FlatConfig c = FlatConfig::parse_file(dir.path() / "main.cfg");
  EXPECT_EQ(c.get_size("train.steps", 0), 100u);
  EXPECT_EQ(c.get_size("seeds", 0), 3u);
  EXPECT_EQ(c.get_list("mechanisms"), (std::vector<std::string>{"DCA", "gmmv2b"}));
  ASSERT_EQ(c.sources().size(), 2u);
  EXPECT_EQ(c.sources()[1].text, "# shared\ntrain.steps = 100\nseeds = 2\n");
  c.set("seeds", "4");
  EXPECT_EQ(c.get_size("seeds", 0), 4u);
  EXPECT_EQ(c.overrides().size(), 1u);
}

TEST(FlatConfig, RejectsCyclesBadLinesAndBadValues) {
  TempDir dir;
  write_file(dir.path() / "a.cfg", "include b.cfg\n");
  write_file(dir.path() / "b.cfg", "include a.cfg\n");
  EXPECT_THROW(FlatConfig::parse_file(dir.path() / "a.cfg"), std::invalid_argument);
  EXPECT_THROW(FlatConfig::parse_string("just words\n"), std::invalid_argument);
  EXPECT_THROW(FlatConfig::parse_string("= 3\n"), std::invalid_argument);
  const FlatConfig c = FlatConfig::parse_string("seeds = ten\nflag = maybe\n");
  EXPECT_THROW(c.get_size("seeds", 1), std::invalid_argument);
  EXPECT_THROW(c.get_bool("flag", false), std::invalid_argument);
  EXPECT_THROW(FlatConfig::parse_file(dir.path() / "missing.cfg"), std::runtime_error);
}

TEST(TrialConfig, ParsedFromFlatConfig) {
  const FlatConfig f = FlatConfig::parse_string(
      "mechanisms = CBA,LSA\nseeds = 2\nseed = 5\ntrain.steps = 40\n"
      "task.max_length = 9\nmodel.attention_hidden = 16\nprecision = 32\n");
  const TrialConfig c = trial_config_from(f);
  EXPECT_EQ(c.mechanisms, (std::vector<Mechanism>{Mechanism::kCba, Mechanism::kLsa}));
  EXPECT_EQ(c.seeds, 2u);
  EXPECT_EQ(c.first_seed, 5u);
  EXPECT_EQ(c.train.steps, 40u);
  EXPECT_EQ(c.task.max_length, 9u);
  EXPECT_EQ(c.model.attention_hidden, 16u);
  EXPECT_EQ(c.precision, Precision::k32);
}

TEST(TrialConfig, RejectsUnknownKeysMechanismsAndZeroSeeds) {
  EXPECT_THROW(trial_config_from(FlatConfig::parse_string("train.stepz = 1\n")),
               std::invalid_argument);
  EXPECT_THROW(trial_config_from(FlatConfig::parse_string("mechanisms = DCA,XYZ\n")),
               std::invalid_argument);
  EXPECT_THROW(trial_config_from(FlatConfig::parse_string("seeds = 0\n")),
               std::invalid_argument);
  EXPECT_THROW(trial_config_from(FlatConfig::parse_string("precision = 16\n")),
               std::invalid_argument);
}

TEST(ShippedConfigs, MatchTheBuiltInDefaults) {
  const fs::path dir = fs::path(LOCATTN_SOURCE_DIR) / "configs";
  const TrialConfig defaults;
  const TrialConfig c = trial_config_from(FlatConfig::parse_file(dir / "alignment_speed.cfg"));
  EXPECT_EQ(c.mechanisms,
            (std::vector<Mechanism>{Mechanism::kDca, Mechanism::kGmmV2b, Mechanism::kLsa}));
  EXPECT_EQ(c.seeds, 10u);
  EXPECT_EQ(c.train.eval_interval, 10u);
  EXPECT_EQ(c.train.steps, defaults.train.steps);
  EXPECT_EQ(c.train.learning_rate, defaults.train.learning_rate);
  EXPECT_EQ(c.task.min_length, defaults.task.min_length);
  EXPECT_EQ(c.task.max_length, defaults.task.max_length);
  const SweepConfig s = sweep_config_from(FlatConfig::parse_file(dir / "length_sweep.cfg"));
  EXPECT_EQ(s.factors, SweepConfig{}.factors);
  EXPECT_EQ(s.samples, SweepConfig{}.samples);
}

TEST(SweepConfig, LengthsScaleWithTheTrainingMaximum) {
  const SweepConfig c = sweep_config_from(FlatConfig::parse_string("sweep.factors = 1, 2.5, 10\n"));
  EXPECT_EQ(c.lengths(16), (std::vector<std::size_t>{16, 40, 160}));
}

ResultTable small_table(std::size_t rows) {
  ResultTable t;
  t.kind = "demo";
  t.columns = {"name", "count", "value", "flag", "missing"};
  for (std::size_t i = 0; i < rows; ++i) {
    t.add_row({std::string("row, \"") + std::to_string(i) + "\"",
               static_cast<std::int64_t>(i), 0.1 * static_cast<double>(i) + 1e-17, i % 2 == 0,
               std::monostate{}});
  }
  t.metadata["note"] = "x";
  return t;
}

TEST(Results, CsvHasHeaderPlusOneLinePerRow) {
  TempDir dir;
  export_results(small_table(3), ExportFormat::kCsv, dir.path() / "t.csv");
  EXPECT_EQ(count_lines(dir.path() / "t.csv"), 4u);
  std::ifstream in(dir.path() / "t.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "name,count,value,flag,missing");
  EXPECT_EQ(first, "\"row, \"\"0\"\"\",0,1.0000000000000001e-17,true,");
}

TEST(Results, JsonRoundTripIsExact) {
  TempDir dir;
  const ResultTable t = small_table(5);
  export_results(t, ExportFormat::kJson, dir.path() / "t.json");
  const ResultTable back = read_json_results(dir.path() / "t.json");
  EXPECT_EQ(back, t);
  EXPECT_TRUE(to_json(t)["rows"][0][4].is_null());
  EXPECT_EQ(to_json(t)["schema_version"], kSchemaVersion);
}

TEST(Results, EmptyTableAndUnwritablePathAreErrors) {
  TempDir dir;
  EXPECT_THROW(export_results(small_table(0), ExportFormat::kCsv, dir.path() / "e.csv"),
               std::invalid_argument);
  write_file(dir.path() / "file", "");
  EXPECT_THROW(export_results(small_table(1), ExportFormat::kJson, dir.path() / "file" / "x.json"),
               std::runtime_error);
  EXPECT_THROW(parse_export_format("xml"), std::invalid_argument);
}

TEST(Results, RowWidthIsEnforced) {
  ResultTable t = small_table(0);
  EXPECT_THROW(t.add_row({std::int64_t{1}}), std::invalid_argument);
  EXPECT_TRUE(std::holds_alternative<std::monostate>(real_cell(std::nan(""))));
}

TrialConfig smoke_config(const fs::path& out) {
  TrialConfig c;
  c.mechanisms = {Mechanism::kDca};
  c.seeds = 1;
  c.train.steps = 10;
  c.train.batch_size = 2;
  c.train.eval_interval = 5;
  c.train.eval_samples = 2;
  c.task.min_length = 3;
  c.task.max_length = 5;
  c.model.attention_hidden = 8;
  c.model.dca_width = 5;
  c.out_dir = out;
  return c;
}

ResultTable without_wall_time(ResultTable t) {
  const std::size_t col = t.column("wall_time_s");
  for (auto& row : t.rows) row[col] = std::monostate{};
  return t;
}

TEST(RunTrials, SmokeRunEmitsOneRowPerEvalAndIsDeterministic) {
  TempDir dir;
  const TrialOutcome a = run_trials(smoke_config(dir.path() / "a"));
  ASSERT_EQ(a.evals.rows.size(), 3u);  // steps 0, 5, 10
  EXPECT_EQ(count_lines(dir.path() / "a" / "trials_evals.csv"), 4u);
  EXPECT_EQ(a.runs.rows.size(), 1u);
  EXPECT_EQ(a.summaries[0].status, "ok");
  EXPECT_TRUE(fs::exists(a.summaries[0].checkpoint));
  const TrialOutcome b = run_trials(smoke_config(dir.path() / "b"));
  EXPECT_EQ(without_wall_time(a.evals), without_wall_time(b.evals));
}

TEST(RunTrials, DivergingRunsAreIsolatedAndRowsStayComplete) {
  TempDir dir;
  TrialConfig c = smoke_config(dir.path());
  c.mechanisms = {Mechanism::kDca, Mechanism::kGmmV2};
  c.train.learning_rate = std::nan("");
  const TrialOutcome o = run_trials(c);
  ASSERT_EQ(o.summaries.size(), 2u);
  for (const auto& s : o.summaries) EXPECT_EQ(s.status, "diverged");
  ASSERT_EQ(o.evals.rows.size(), 6u);
  const std::size_t status = o.evals.column("status");
  const std::size_t mcd = o.evals.column("mcd_dtw");
  EXPECT_EQ(std::get<std::string>(o.evals.rows[2][status]), "diverged");
  EXPECT_TRUE(std::holds_alternative<std::monostate>(o.evals.rows[2][mcd]));
}

TEST(RunTrials, WorkerPoolMatchesSerialResults) {
  TempDir dir;
  TrialConfig c = smoke_config(dir.path() / "serial");
  c.mechanisms = {Mechanism::kDca, Mechanism::kGmmV1b};
  c.seeds = 2;
  const TrialOutcome serial = run_trials(c);
  c.workers = 3;
  c.out_dir = dir.path() / "pool";
  const TrialOutcome pool = run_trials(c);
  EXPECT_EQ(without_wall_time(serial.evals), without_wall_time(pool.evals));
}

TEST(Checkpoint, RoundTripRestoresParametersAndBehaviour) {
  TempDir dir;
  ModelConfig mc;
  mc.mechanism = Mechanism::kLsa;
  mc.attention_hidden = 8;
  Model<double> model(mc, 4);
  model.set_trained_steps(77);
  save_checkpoint(model, dir.path() / "m.ckpt", {{"seed", "4"}});
  const auto loaded = load_checkpoint<double>(dir.path() / "m.ckpt");
  EXPECT_EQ(loaded->trained_steps(), 77u);
  EXPECT_EQ(loaded->config().attention_hidden, 8u);
  auto it = loaded->params().begin();
  for (const auto& p : model.params()) {
    EXPECT_EQ(p.value.values(), it->value.values()) << p.name;
    ++it;
  }
  const std::vector<int> symbols = {1, 2, 3};
  EXPECT_EQ(model.generate(symbols, 6).frames.frames,
            loaded->generate(symbols, 6).frames.frames);
  EXPECT_EQ(read_checkpoint_info(dir.path() / "m.ckpt").meta.at("seed"), "4");
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  TempDir dir;
  write_file(dir.path() / "bad.ckpt", "not a checkpoint\n");
  EXPECT_THROW(load_checkpoint<double>(dir.path() / "bad.ckpt"), std::invalid_argument);
  EXPECT_THROW(load_checkpoint<double>(dir.path() / "none.ckpt"), std::runtime_error);
}

TEST(LengthSweep, RejectsUntrainedModels) {
  ModelConfig mc;
  mc.attention_hidden = 8;
  Model<double> model(mc, 0);
  SyntheticTask task(TaskConfig{});
  const std::vector<SweepModel<double>> models = {{Mechanism::kDca, 0, &model}};
  EXPECT_THROW(run_length_sweep(models, task, 16, {16}, SweepConfig{}), std::invalid_argument);
}

TEST(LengthSweep, RowsCarryTheTrainingBoundary) {
  ModelConfig mc;
  mc.mechanism = Mechanism::kGmmV2b;
  mc.attention_hidden = 8;
  Model<double> model(mc, 0);
  model.set_trained_steps(1);
  SyntheticTask task(TaskConfig{});
  SweepConfig sc;
  sc.samples = 2;
  const std::vector<SweepModel<double>> models = {{Mechanism::kGmmV2b, 0, &model}};
  const ResultTable t = run_length_sweep(models, task, 4, {4, 8}, sc);
  ASSERT_EQ(t.rows.size(), 4u);
  const std::size_t beyond = t.column("beyond_training");
  EXPECT_FALSE(std::get<bool>(t.rows[0][beyond]));
  EXPECT_TRUE(std::get<bool>(t.rows[3][beyond]));
  const auto summary = summarize_sweep(t);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[1].length, 8u);
}

TEST(LengthSweep, FailureOnsetIsTheFirstLowLength) {
  const std::vector<SweepSummaryRow> rows = {
      {"CBA", 16, 0.8, 0}, {"CBA", 24, 0.3, 0}, {"CBA", 32, 0.6, 0}, {"LSA", 16, 1.0, 0}};
  EXPECT_EQ(failure_onset(rows, "CBA", 0.5), std::optional<std::size_t>(24));
  EXPECT_FALSE(failure_onset(rows, "LSA", 0.5).has_value());
}

TEST(GradCheckHarness, AllMechanismsPassAtTinySize) {
  for (Mechanism m : kAllMechanisms) {
    const GradCheckResult r = check_model_gradients(m, 2);
    EXPECT_LT(r.max_rel_error, kGradCheckTolerance) << mechanism_name(m) << " " << r.worst;
  }
}

}  // namespace
}  // namespace locattn
