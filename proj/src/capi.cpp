// SPDX-License-Identifier: Apache-2.0
//
// C interface over the pipeline: thin argument marshalling, error-code
// translation, and the scenario-level parallelism behind `jobs`.
#include "flowcast.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "flowcast/dataset.hpp"
#include "flowcast/des.hpp"
#include "flowcast/error.hpp"
#include "flowcast/io_util.hpp"
#include "flowcast/model.hpp"
#include "flowcast/scenario.hpp"
#include "flowcast/train.hpp"

namespace {

using namespace flowcast;

constexpr const char* kVersion = "0.1.0";

thread_local std::string g_last_error;

// Maps the exception hierarchy onto fc_status and stores the diagnostic.
template <typename Fn>
fc_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FC_OK;
  } catch (const ConfigError& e) {
    g_last_error = e.what();
    return FC_ERR_CONFIG;
  } catch (const ValidationError& e) {
    g_last_error = e.what();
    return FC_ERR_CONFIG;
  } catch (const ParseError& e) {
    g_last_error = e.what();
    return FC_ERR_PARSE;
  } catch (const IoError& e) {
    g_last_error = e.what();
    return FC_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FC_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return FC_ERR_RUNTIME;
  }
}

void require(const char* value, const char* name) {
  if (value == nullptr) throw ConfigError(std::string("null argument: ") + name);
}

char* dup_text(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs fn(0..n-1) on up to `jobs` threads. Work items must be independent;
// the first exception wins and is rethrown after all workers finish.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::min(std::max(jobs, 1), n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

// truth file paired with a scenario file: scenario_0007.json -> truth_0007.json
std::string truth_file_for(const std::string& scenario_file) {
  const std::string prefix = "scenario_";
  if (scenario_file.rfind(prefix, 0) != 0)
    throw ConfigError("dataset file \"" + scenario_file +
                      "\" does not follow the scenario_NNNN.json naming scheme");
  return "truth_" + scenario_file.substr(prefix.size());
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

std::string packets_csv_text(const std::vector<PacketRecord>& packets) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "flow,seq,gen_time_s,delivered,delivery_time_s,delay_s\n";
  for (const PacketRecord& p : packets) {
    out << p.flow << ',' << p.seq << ',' << p.gen_time << ',' << (p.dropped ? 0 : 1) << ',';
    if (!p.dropped) out << p.delivery_time << ',' << (p.delivery_time - p.gen_time);
    else out << ',';
    out << '\n';
  }
  return out.str();
}

struct EvalInputs {
  Model model;
  std::vector<Scenario> scenarios;
  std::vector<GroundTruth> truths;
};

std::vector<int> split_selection(const LoadedDataset& ds, const std::string& split) {
  if (split == "train") return ds.split.train;
  if (split == "val") return ds.split.val;
  if (split == "test") return ds.split.test;
  if (split == "all") {
    std::vector<int> all(ds.scenarios.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return all;
  }
  throw ConfigError("unknown split \"" + split + "\" (expected train, val, test, or all)");
}

EvalInputs load_eval_inputs(const char* checkpoint_path, const char* dataset_dir,
                            const char* truth_dir, const std::string& split) {
  EvalInputs in;
  in.model = load_checkpoint(checkpoint_path);
  const LoadedDataset ds = load_dataset(dataset_dir);
  const std::vector<int> picks = split_selection(ds, split);
  if (picks.empty())
    throw ConfigError("split \"" + split + "\" of " + dataset_dir + " holds no scenarios");
  for (const int i : picks) {
    in.scenarios.push_back(ds.scenarios[static_cast<std::size_t>(i)]);
    in.truths.push_back(load_ground_truth(
        join_path(truth_dir, truth_file_for(ds.files[static_cast<std::size_t>(i)]))));
  }
  return in;
}

// Scales every flow's traffic intensity by k, leaving topology, routing, and
// window structure unchanged; trace replays repeat each timestamp round(k)
// times since their packet count is explicit.
Scenario scale_traffic(Scenario s, double k) {
  for (Flow& f : s.flows) {
    if (auto* cb = std::get_if<ConstantBurst>(&f.profile)) {
      cb->rate *= k;
    } else if (auto* mb = std::get_if<MultiBurst>(&f.profile)) {
      for (ConstantBurst& c : mb->components) c.rate *= k;
    } else if (auto* tr = std::get_if<TraceReplay>(&f.profile)) {
      const auto repeats = std::max<std::int64_t>(1, std::llround(k));
      std::vector<double> times;
      times.reserve(tr->timestamps.size() * static_cast<std::size_t>(repeats));
      for (const double t : tr->timestamps)
        for (std::int64_t r = 0; r < repeats; ++r) times.push_back(t);
      tr->timestamps = std::move(times);
    }
  }
  return s;
}

std::vector<std::pair<std::string, double>> parse_multipliers(const std::string& spec) {
  std::vector<std::pair<std::string, double>> out;
  std::istringstream stream(spec);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const auto begin = token.find_first_not_of(" \t");
    const auto end = token.find_last_not_of(" \t");
    if (begin == std::string::npos)
      throw ConfigError("empty entry in multiplier list \"" + spec + "\"");
    std::string item = token.substr(begin, end - begin + 1);
    std::string digits = item;
    if (!digits.empty() && (digits.back() == 'x' || digits.back() == 'X')) digits.pop_back();
    std::size_t used = 0;
    double k = 0.0;
    try {
      k = std::stod(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != digits.size() || !(k > 0.0))
      throw ConfigError("bad multiplier \"" + item + "\" (expected a positive number like 10x)");
    out.emplace_back(item, k);
  }
  if (out.empty()) throw ConfigError("multiplier list \"" + spec + "\" holds no entries");
  return out;
}

}  // namespace

extern "C" {

const char* fc_version(void) { return kVersion; }

const char* fc_last_error(void) { return g_last_error.c_str(); }

void fc_text_free(char* text) { std::free(text); }

fc_status fc_generate(const char* config_path, int64_t seed, double train_ratio,
                      double val_ratio, double test_ratio, int32_t jobs,
                      const char* out_dir, int32_t* out_count) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out_dir, "out_dir");
    GenConfig cfg = load_gen_config(config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    std::vector<Scenario> scenarios(static_cast<std::size_t>(cfg.n_scenarios));
    parallel_for(cfg.n_scenarios, jobs,
                 [&](int i) { scenarios[static_cast<std::size_t>(i)] = generate_scenario(cfg, i); });
    const SplitIndices split =
        split_indices(cfg.n_scenarios, {train_ratio, val_ratio, test_ratio}, cfg.seed);
    write_dataset(out_dir, scenarios, split, &cfg);
    if (out_count != nullptr) *out_count = cfg.n_scenarios;
  });
}

fc_status fc_simulate(const char* dataset_dir, const char* out_dir, int32_t packets_csv,
                      int32_t jobs, int32_t* out_count) {
  return guarded([&] {
    require(dataset_dir, "dataset_dir");
    require(out_dir, "out_dir");
    const LoadedDataset ds = load_dataset(dataset_dir);
    const int n = static_cast<int>(ds.scenarios.size());
    std::vector<GroundTruth> truths(static_cast<std::size_t>(n));
    std::vector<std::string> csvs(static_cast<std::size_t>(n));
    parallel_for(n, jobs, [&](int i) {
      const Scenario& s = ds.scenarios[static_cast<std::size_t>(i)];
      const SimResult sim = simulate(s);
      truths[static_cast<std::size_t>(i)] = aggregate(sim.packets, s);
      if (packets_csv != 0) csvs[static_cast<std::size_t>(i)] = packets_csv_text(sim.packets);
    });
    std::filesystem::create_directories(out_dir);
    for (int i = 0; i < n; ++i) {
      const std::string truth_name = truth_file_for(ds.files[static_cast<std::size_t>(i)]);
      save_ground_truth(join_path(out_dir, truth_name), truths[static_cast<std::size_t>(i)]);
      if (packets_csv != 0) {
        // truth_NNNN.json -> packets_NNNN.csv
        const std::string stem = truth_name.substr(6, truth_name.size() - 6 - 5);
        write_text_file_atomic(join_path(out_dir, "packets_" + stem + ".csv"),
                               csvs[static_cast<std::size_t>(i)]);
      }
    }
    if (out_count != nullptr) *out_count = n;
  });
}

fc_status fc_train(const char* dataset_dir, const char* truth_dir, const char* preset,
                   const char* train_overrides_json, int32_t state_dim, int32_t mp_iterations,
                   int64_t seed, const char* checkpoint_out, const char* history_out,
                   fc_progress_fn progress, void* user, int32_t* best_epoch,
                   double* best_val_mape_pct) {
  return guarded([&] {
    require(dataset_dir, "dataset_dir");
    require(truth_dir, "truth_dir");
    require(checkpoint_out, "checkpoint_out");

    ModelConfig mcfg;
    TrainConfig tcfg;
    if (preset != nullptr && *preset != '\0') {
      const std::string name = preset;
      if (name == "desk") apply_desk_preset(mcfg, tcfg);
      else if (name == "paper") apply_paper_preset(mcfg, tcfg);
      else throw ConfigError("unknown preset \"" + name + "\" (expected desk or paper)");
    }
    if (train_overrides_json != nullptr && *train_overrides_json != '\0')
      apply_train_config_json(tcfg, train_overrides_json);
    if (state_dim > 0) mcfg.state_dim = state_dim;
    if (mp_iterations > 0) mcfg.mp_iterations = mp_iterations;
    tcfg.seed = static_cast<std::uint64_t>(seed);

    const LoadedDataset ds = load_dataset(dataset_dir);
    auto gather = [&](const std::vector<int>& picks, std::vector<Scenario>& ss,
                      std::vector<GroundTruth>& gts) {
      for (const int i : picks) {
        ss.push_back(ds.scenarios[static_cast<std::size_t>(i)]);
        gts.push_back(load_ground_truth(
            join_path(truth_dir, truth_file_for(ds.files[static_cast<std::size_t>(i)]))));
      }
    };
    std::vector<Scenario> train_s, val_s;
    std::vector<GroundTruth> train_gt, val_gt;
    gather(ds.split.train, train_s, train_gt);
    gather(ds.split.val, val_s, val_gt);

    TrainProgressFn forward;
    if (progress != nullptr) {
      forward = [progress, user](const EpochLog& log) {
        fc_epoch_log row;
        row.epoch = log.epoch;
        row.has_train_loss = log.mean_train_loss.has_value() ? 1 : 0;
        row.mean_train_loss = log.mean_train_loss.value_or(0.0);
        row.val_mape_pct = log.val_mape_pct;
        row.lr = log.lr;
        row.improved = log.improved ? 1 : 0;
        row.plateau_halved = log.plateau_halved ? 1 : 0;
        progress(&row, user);
      };
    }

    const TrainResult result = train(mcfg, tcfg, train_s, train_gt, val_s, val_gt, forward);
    save_checkpoint(result.model, checkpoint_out);
    if (history_out != nullptr && *history_out != '\0')
      write_text_file_atomic(history_out, train_history_to_json_text(result));
    if (best_epoch != nullptr) *best_epoch = result.best_epoch;
    if (best_val_mape_pct != nullptr) *best_val_mape_pct = result.best_val_mape_pct;
  });
}

fc_status fc_predict(const char* checkpoint_path, const char* scenario_path,
                     const char* out_path) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(scenario_path, "scenario_path");
    require(out_path, "out_path");
    const Model model = load_checkpoint(checkpoint_path);
    const Scenario scenario = load_scenario(scenario_path);
    const Prediction prediction = predict_scenario(model, scenario);
    save_prediction(prediction, out_path);
  });
}

fc_status fc_evaluate(const char* checkpoint_path, const char* dataset_dir,
                      const char* truth_dir, const char* split, const char* report_json_out,
                      const char* residuals_csv_out, char** out_table,
                      double* overall_mape_pct) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(dataset_dir, "dataset_dir");
    require(truth_dir, "truth_dir");
    require(split, "split");
    const EvalInputs in = load_eval_inputs(checkpoint_path, dataset_dir, truth_dir, split);
    std::string csv;
    const EvalReport report =
        evaluate(in.model, in.scenarios, in.truths,
                 residuals_csv_out != nullptr && *residuals_csv_out != '\0' ? &csv : nullptr);
    if (report_json_out != nullptr && *report_json_out != '\0')
      write_text_file_atomic(report_json_out, eval_report_to_json_text(report));
    if (residuals_csv_out != nullptr && *residuals_csv_out != '\0')
      write_text_file_atomic(residuals_csv_out, csv);
    if (out_table != nullptr) *out_table = dup_text(eval_report_table(report));
    if (overall_mape_pct != nullptr) *overall_mape_pct = report.overall_mape_pct;
  });
}

fc_status fc_bench(const char* checkpoint_path, const char* scenario_path, int32_t reps,
                   const char* packet_multipliers, const char* json_out, char** out_table) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(scenario_path, "scenario_path");
    const Model model = load_checkpoint(checkpoint_path);
    const Scenario base = load_scenario(scenario_path);
    std::vector<BenchRow> rows;
    if (packet_multipliers == nullptr || *packet_multipliers == '\0') {
      rows.push_back(bench_inference(model, base, reps, "1x"));
    } else {
      for (const auto& [label, k] : parse_multipliers(packet_multipliers))
        rows.push_back(bench_inference(model, scale_traffic(base, k), reps, label));
    }
    if (json_out != nullptr && *json_out != '\0')
      write_text_file_atomic(json_out, bench_to_json_text(rows));
    if (out_table != nullptr) *out_table = dup_text(bench_table(rows));
  });
}

}  // extern "C"
