/* SPDX-License-Identifier: Apache-2.0
 *
 * flowcast — flow-level network performance prediction.
 *
 * C interface to the pipeline: generate scenario datasets, simulate them
 * packet by packet for ground truth, train the flow model, and run
 * prediction / evaluation / inference benchmarks from a saved checkpoint.
 *
 * Every operation returns an fc_status; on failure, fc_last_error() holds a
 * human-readable diagnostic for the calling thread.  Strings returned through
 * char** output parameters are heap-allocated and must be released with
 * fc_text_free().  All functions are safe to call from multiple threads as
 * long as no two calls touch the same output paths.
 */
#ifndef FLOWCAST_H
#define FLOWCAST_H

#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

typedef enum fc_status {
  FC_OK = 0,
  FC_ERR_CONFIG = 1,  /* invalid configuration or argument */
  FC_ERR_PARSE = 2,   /* malformed input text or file */
  FC_ERR_IO = 3,      /* filesystem failure */
  FC_ERR_RUNTIME = 4  /* numeric or state failure while running */
} fc_status;

/* Library semantic version, e.g. "0.1.0".  Static storage; do not free. */
const char* fc_version(void);

/* Diagnostic for the most recent failing call on this thread ("" if the last
 * call succeeded).  Valid until the next flowcast call on the same thread. */
const char* fc_last_error(void);

/* Releases a string returned through a char** output parameter. */
void fc_text_free(char* text);

/* --------------------------------------------------------------------------
 * Dataset pipeline
 * ------------------------------------------------------------------------ */

/* Generates a dataset directory (scenario_NNNN.json files plus manifest.json
 * with the train/val/test split) from a generator config JSON file.
 *
 * seed >= 0 replaces the config's seed (the manifest records the value that
 * was used); seed < 0 keeps the config as written.  The three ratios must sum
 * to 1.  jobs > 1 generates scenarios in parallel; results are identical to a
 * serial run.  out_count (optional) receives the number of scenarios. */
fc_status fc_generate(const char* config_path, int64_t seed, double train_ratio,
                      double val_ratio, double test_ratio, int32_t jobs,
                      const char* out_dir, int32_t* out_count);

/* Simulates every scenario of a dataset directory and writes one ground-truth
 * file per scenario into out_dir, named truth_NNNN.json to match the
 * scenario_NNNN.json it was computed from.  packets_csv != 0 additionally
 * writes packets_NNNN.csv with one row per simulated packet.  jobs > 1 runs
 * scenarios in parallel; results are identical to a serial run. */
fc_status fc_simulate(const char* dataset_dir, const char* out_dir,
                      int32_t packets_csv, int32_t jobs, int32_t* out_count);

/* --------------------------------------------------------------------------
 * Training
 * ------------------------------------------------------------------------ */

/* One row of the training history.  epoch 0 is the pre-training baseline
 * (has_train_loss = 0); lr is the rate in effect during that epoch. */
typedef struct fc_epoch_log {
  int32_t epoch;
  int32_t has_train_loss;
  double mean_train_loss;
  double val_mape_pct;
  double lr;
  int32_t improved;       /* best-so-far validation MAPE */
  int32_t plateau_halved; /* schedule cut the rate after this epoch */
} fc_epoch_log;

typedef void (*fc_progress_fn)(const fc_epoch_log* log, void* user);

/* Trains on the dataset's train split, selects the best epoch by the val
 * split, and writes the winning model to checkpoint_out.  Ground truth is
 * read from truth_dir (files named as fc_simulate writes them).
 *
 * preset is NULL, "desk" (small/fast), or "paper" (full size); the JSON text
 * in train_overrides_json (optional) then overrides individual training
 * fields; state_dim / mp_iterations > 0 override the model size last.  seed
 * drives initialization and scenario sampling.  history_out (optional)
 * receives the epoch-by-epoch history as JSON.  progress (optional) is
 * invoked once per history row as training proceeds.  best_epoch and
 * best_val_mape_pct (optional) receive the selected epoch's results. */
fc_status fc_train(const char* dataset_dir, const char* truth_dir,
                   const char* preset, const char* train_overrides_json,
                   int32_t state_dim, int32_t mp_iterations, int64_t seed,
                   const char* checkpoint_out, const char* history_out,
                   fc_progress_fn progress, void* user, int32_t* best_epoch,
                   double* best_val_mape_pct);

/* --------------------------------------------------------------------------
 * Inference
 * ------------------------------------------------------------------------ */

/* Predicts per-flow per-window delay and jitter statistics (seconds) for one
 * scenario file and writes them as JSON to out_path.  Fails if the scenario's
 * window size differs from the one the checkpoint was trained at. */
fc_status fc_predict(const char* checkpoint_path, const char* scenario_path,
                     const char* out_path);

/* Evaluates a checkpoint against simulated ground truth over one dataset
 * split ("train", "val", "test", or "all").  report_json_out (optional)
 * receives the per-statistic metric rows as JSON; residuals_csv_out
 * (optional) receives one CSV row per (scenario, flow, window, statistic);
 * out_table (optional) receives a printable metrics table;
 * overall_mape_pct (optional) receives the pooled MAPE over all cells. */
fc_status fc_evaluate(const char* checkpoint_path, const char* dataset_dir,
                      const char* truth_dir, const char* split,
                      const char* report_json_out, const char* residuals_csv_out,
                      char** out_table, double* overall_mape_pct);

/* Times repeated forward passes of a checkpoint over one scenario.  reps >= 3
 * timed repetitions per row.  packet_multipliers is NULL/"" for a single row,
 * or a comma list like "1x,10x,100x": each entry scales every flow's traffic
 * intensity by that factor, so rows span packet counts while topology, flow
 * count, and window count stay fixed.  json_out (optional) receives the rows
 * as JSON; out_table (optional) receives a printable table. */
fc_status fc_bench(const char* checkpoint_path, const char* scenario_path,
                   int32_t reps, const char* packet_multipliers,
                   const char* json_out, char** out_table);

#if defined(__cplusplus)
} /* extern "C" */
#endif

#endif /* FLOWCAST_H */
