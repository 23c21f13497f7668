// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowcast/des.hpp"
#include "flowcast/model.hpp"
#include "flowcast/scenario.hpp"

namespace flowcast {

struct TrainConfig {
  int max_epochs = 300;
  int steps_per_epoch = 500;  // scenario-gradient steps per epoch
  double lr = 0.001;
  int plateau_patience = 10;   // epochs without val improvement before halving
  double plateau_factor = 0.5;
  std::uint64_t seed = 0;
  int batch_scenarios = 1;  // scenarios averaged per gradient step
};

// Throws ConfigError naming the violated constraint.
void validate_train_config(const TrainConfig& cfg);

// JSON object keyed by field name; every key is optional. Unknown keys are
// rejected; the parsed config is validated.
TrainConfig train_config_from_json_text(const std::string& text);
std::string train_config_to_json_text(const TrainConfig& cfg);
TrainConfig load_train_config(const std::string& path);

// Overlays the keys present in `text` onto `cfg` (e.g. on top of a preset),
// leaving absent fields untouched. Same key set and validation as above.
void apply_train_config_json(TrainConfig& cfg, const std::string& text);

// Bundled presets: desk is sized for minute-scale CPU runs, paper mirrors the
// published hyperparameters.
void apply_desk_preset(ModelConfig& mcfg, TrainConfig& tcfg);   // 16-dim, T=4, 50x200
void apply_paper_preset(ModelConfig& mcfg, TrainConfig& tcfg);  // 32-dim, T=8, 300x500

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Pooled mean of |pred-target|/target as a fraction. Entries with
// target <= 0 are masked out; throws Error("no valid targets") when nothing
// survives the mask.
double mape_loss(const std::vector<double>& pred, const std::vector<double>& target);

// MAPE (%), MAE (target units), and R^2 = 1 - sum((p-t)^2)/sum((t-mean)^2)
// over unmasked entries. R^2 is absent when the targets are constant;
// all metrics are absent when count == 0.
struct StatMetrics {
  std::int64_t count = 0;
  std::optional<double> mape_pct;
  std::optional<double> mae;
  std::optional<double> r2;
};
StatMetrics compute_metrics(const std::vector<double>& pred, const std::vector<double>& target);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochLog {
  int epoch = 0;  // 0 is the pre-training baseline (no steps, validation only)
  std::optional<double> mean_train_loss;  // MAPE fraction averaged over steps
  double val_mape_pct = 0.0;
  double lr = 0.0;  // rate in effect during this epoch's steps
  bool improved = false;
  bool plateau_halved = false;  // halving announced after this epoch's eval
};

struct TrainResult {
  Model model;  // parameters of the best-validation epoch
  int best_epoch = 0;
  double best_val_mape_pct = 0.0;
  std::vector<EpochLog> history;
};

using TrainProgressFn = std::function<void(const EpochLog&)>;

// Trains a fresh model: fits the feature normalizer on the training split,
// runs seeded scenario-gradient steps (scenarios drawn with replacement),
// evaluates validation MAPE each epoch, halves the learning rate after
// `plateau_patience` non-improving epochs, and returns the parameters of the
// epoch with the lowest validation MAPE. Deterministic in (configs, data).
// Throws Error with a diagnostic if the loss turns non-finite.
TrainResult train(const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const std::vector<Scenario>& train_scenarios,
                  const std::vector<GroundTruth>& train_truth,
                  const std::vector<Scenario>& val_scenarios,
                  const std::vector<GroundTruth>& val_truth,
                  const TrainProgressFn& progress = {});

std::string train_history_to_json_text(const TrainResult& r);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct MetricRow {
  std::string statistic;  // "delay.avg" ... "jitter.p99"
  StatMetrics metrics;
};

struct EvalReport {
  std::vector<MetricRow> rows;  // 10 rows, delay stats then jitter stats
  std::int64_t overall_count = 0;
  double overall_mape_pct = 0.0;  // pooled over every unmasked cell
  double wall_time_s = 0.0;
  double median_scenario_time_s = 0.0;
};

// Predicts every scenario and scores predictions against ground truth per
// statistic. Cells whose ground truth is absent or <= 0 are masked. When
// `residuals_csv` is non-null it receives one
// "scenario,flow,window,statistic,target,prediction" row per unmasked cell.
// Throws ConfigError on empty/misaligned inputs, Error when every cell is
// masked.
EvalReport evaluate(const Model& m, const std::vector<Scenario>& scenarios,
                    const std::vector<GroundTruth>& truth, std::string* residuals_csv = nullptr);

std::string eval_report_to_json_text(const EvalReport& r);
std::string eval_report_table(const EvalReport& r);

// ---------------------------------------------------------------------------
// Inference benchmarking
// ---------------------------------------------------------------------------

struct BenchRow {
  std::string label;
  int devices = 0;
  int flows = 0;
  int windows = 0;
  std::int64_t packets = 0;   // offered packets across all flows
  double median_s = 0.0;      // median wall time of one full-scenario forward
  std::vector<double> times_s;  // one entry per repetition
};

// Times the model forward pass (graph and features are precomputed outside
// the clock, matching the deployment pattern where aggregated inputs arrive
// from telemetry). reps must be >= 3.
BenchRow bench_inference(const Model& m, const Scenario& s, int reps,
                         const std::string& label = "");

std::string bench_to_json_text(const std::vector<BenchRow>& rows);
std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace flowcast
