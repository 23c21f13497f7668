// SPDX-License-Identifier: Apache-2.0
#include "flowcast/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "flowcast/error.hpp"
#include "flowcast/expanded_graph.hpp"
#include "flowcast/features.hpp"
#include "flowcast/io_util.hpp"
#include "flowcast/rng.hpp"
#include "flowcast/tape.hpp"
#include "flowcast/traffic.hpp"

namespace flowcast {

using nlohmann::json;
using nlohmann::ordered_json;

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (cfg.steps_per_epoch < 1) throw ConfigError("steps_per_epoch must be >= 1");
  if (!(cfg.lr >= 0.0)) throw ConfigError("lr must be >= 0");
  if (cfg.plateau_patience < 1) throw ConfigError("plateau_patience must be >= 1");
  if (!(cfg.plateau_factor > 0.0) || !(cfg.plateau_factor < 1.0))
    throw ConfigError("plateau_factor must lie in (0, 1)");
  if (cfg.batch_scenarios < 1) throw ConfigError("batch_scenarios must be >= 1");
}

void apply_train_config_json(TrainConfig& cfg, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("train config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("train config: top level must be an object");

  static const char* const kKeys[] = {"max_epochs",      "steps_per_epoch", "lr",
                                      "plateau_patience", "plateau_factor",  "seed",
                                      "batch_scenarios"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) throw ParseError("train config: unknown key \"" + key + "\"");
  }
  auto get_int = [&](const char* k, int& dst) {
    if (!j.contains(k)) return;
    if (!j[k].is_number_integer()) throw ParseError(std::string("train config: field \"") + k +
                                                    "\" must be an integer");
    dst = j[k].get<int>();
  };
  auto get_num = [&](const char* k, double& dst) {
    if (!j.contains(k)) return;
    if (!j[k].is_number()) throw ParseError(std::string("train config: field \"") + k +
                                            "\" must be a number");
    dst = j[k].get<double>();
  };
  get_int("max_epochs", cfg.max_epochs);
  get_int("steps_per_epoch", cfg.steps_per_epoch);
  get_num("lr", cfg.lr);
  get_int("plateau_patience", cfg.plateau_patience);
  get_num("plateau_factor", cfg.plateau_factor);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned())
      throw ParseError("train config: field \"seed\" must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  get_int("batch_scenarios", cfg.batch_scenarios);
  validate_train_config(cfg);
}

TrainConfig train_config_from_json_text(const std::string& text) {
  TrainConfig cfg;
  apply_train_config_json(cfg, text);
  return cfg;
}

std::string train_config_to_json_text(const TrainConfig& cfg) {
  ordered_json j;
  j["max_epochs"] = cfg.max_epochs;
  j["steps_per_epoch"] = cfg.steps_per_epoch;
  j["lr"] = cfg.lr;
  j["plateau_patience"] = cfg.plateau_patience;
  j["plateau_factor"] = cfg.plateau_factor;
  j["seed"] = cfg.seed;
  j["batch_scenarios"] = cfg.batch_scenarios;
  return j.dump(2) + "\n";
}

TrainConfig load_train_config(const std::string& path) {
  try {
    return train_config_from_json_text(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void apply_desk_preset(ModelConfig& mcfg, TrainConfig& tcfg) {
  mcfg.state_dim = 16;
  mcfg.mp_iterations = 4;
  tcfg.max_epochs = 50;
  tcfg.steps_per_epoch = 200;
}

void apply_paper_preset(ModelConfig& mcfg, TrainConfig& tcfg) {
  mcfg.state_dim = 32;
  mcfg.mp_iterations = 8;
  tcfg.max_epochs = 300;
  tcfg.steps_per_epoch = 500;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double mape_loss(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size()) throw Error("mape_loss: mismatched lengths");
  double sum = 0.0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(target[i] > 0.0)) continue;
    sum += std::abs(pred[i] - target[i]) / target[i];
    ++n;
  }
  if (n == 0) throw Error("no valid targets");
  return sum / static_cast<double>(n);
}

StatMetrics compute_metrics(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size()) throw Error("compute_metrics: mismatched lengths");
  StatMetrics out;
  double abs_sum = 0.0, ratio_sum = 0.0, t_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(target[i] > 0.0)) continue;
    ++out.count;
    abs_sum += std::abs(pred[i] - target[i]);
    ratio_sum += std::abs(pred[i] - target[i]) / target[i];
    t_sum += target[i];
  }
  if (out.count == 0) return out;
  const double n = static_cast<double>(out.count);
  out.mape_pct = 100.0 * ratio_sum / n;
  out.mae = abs_sum / n;
  const double t_mean = t_sum / n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(target[i] > 0.0)) continue;
    ss_res += (pred[i] - target[i]) * (pred[i] - target[i]);
    ss_tot += (target[i] - t_mean) * (target[i] - t_mean);
  }
  if (ss_tot > 0.0) out.r2 = 1.0 - ss_res / ss_tot;
  return out;
}

// ---------------------------------------------------------------------------
// Scenario preparation (shared by training, validation, evaluation)
// ---------------------------------------------------------------------------

namespace {

struct PreparedScenario {
  ExpandedGraph graph;
  WindowFeatures feats;
  // Targets in microseconds, aligned with the model's output order; mask = 1
  // where ground truth exists and is positive.
  std::vector<std::vector<std::array<double, kNumTargets>>> target_us;  // [flow][window]
  std::vector<std::vector<std::array<unsigned char, kNumTargets>>> mask;
  std::int64_t valid_cells = 0;  // unmasked scalar entries
};

std::array<double, 5> stats_array(const WindowStats& s) {
  return {s.avg, s.median, s.p90, s.p95, s.p99};
}

PreparedScenario prepare_scenario(const Scenario& s, const GroundTruth& gt,
                                  const std::string& ctx) {
  PreparedScenario p;
  p.graph = build_expanded_graph(s);
  p.feats = compute_window_features(s);
  const int windows = p.feats.windows;
  if (gt.windows > windows)
    throw ConfigError(ctx + ": ground truth has " + std::to_string(gt.windows) +
                      " windows but the scenario has " + std::to_string(windows));

  p.target_us.assign(static_cast<std::size_t>(p.graph.n_flows), {});
  p.mask.assign(static_cast<std::size_t>(p.graph.n_flows), {});
  for (int f = 0; f < p.graph.n_flows; ++f) {
    auto& tf = p.target_us[static_cast<std::size_t>(f)];
    auto& mf = p.mask[static_cast<std::size_t>(f)];
    tf.assign(static_cast<std::size_t>(windows), {});
    mf.assign(static_cast<std::size_t>(windows), {});
    const auto it = gt.flows.find(p.graph.flow_ids[static_cast<std::size_t>(f)]);
    if (it == gt.flows.end()) continue;
    for (int w = 0; w < windows && w < static_cast<int>(it->second.size()); ++w) {
      const FlowWindowTruth& cell = it->second[static_cast<std::size_t>(w)];
      auto put = [&](int base, const std::optional<WindowStats>& stats) {
        if (!stats) return;
        const auto vals = stats_array(*stats);
        for (int k = 0; k < 5; ++k) {
          const double us = vals[static_cast<std::size_t>(k)] * 1e6;
          tf[static_cast<std::size_t>(w)][static_cast<std::size_t>(base + k)] = us;
          if (us > 0.0) {
            mf[static_cast<std::size_t>(w)][static_cast<std::size_t>(base + k)] = 1;
            ++p.valid_cells;
          }
        }
      };
      put(0, cell.delay);
      put(5, cell.jitter);
    }
  }
  return p;
}

// Builds the scenario loss on the tape: mean over unmasked entries of
// |pred - target| / target. Returns the node and the unmasked entry count.
std::pair<Tape::Id, std::int64_t> scenario_loss(const Model& m, Tape& t,
                                                const PreparedScenario& p) {
  if (p.valid_cells == 0) throw Error("no valid targets");
  const ForwardResult fwd = forward_on_tape(m, t, p.graph, p.feats);
  std::vector<Tape::Id> terms;
  for (std::size_t f = 0; f < p.target_us.size(); ++f) {
    for (std::size_t w = 0; w < p.target_us[f].size(); ++w) {
      const auto& mask = p.mask[f][w];
      bool any = false;
      for (unsigned char b : mask) any = any || b != 0;
      if (!any) continue;
      terms.push_back(t.mape_sum(fwd.y[f][w],
                                 std::span<const double>(p.target_us[f][w].data(), kNumTargets),
                                 std::span<const unsigned char>(mask.data(), kNumTargets)));
    }
  }
  Tape::Id total = terms.size() == 1 ? terms[0] : t.sum(terms);
  return {t.scale(total, 1.0 / static_cast<double>(p.valid_cells)), p.valid_cells};
}

// Validation MAPE (%) pooled over all unmasked cells of all scenarios,
// computed forward-only on a reusable tape.
double pooled_mape_pct(const Model& m, Tape& t, const std::vector<PreparedScenario>& prepared) {
  double ratio_sum = 0.0;
  std::int64_t n = 0;
  for (const PreparedScenario& p : prepared) {
    t.reset();
    const ForwardResult fwd = forward_on_tape(m, t, p.graph, p.feats);
    for (std::size_t f = 0; f < p.target_us.size(); ++f) {
      for (std::size_t w = 0; w < p.target_us[f].size(); ++w) {
        const auto pred = t.value(fwd.y[f][w]);
        for (int k = 0; k < kNumTargets; ++k) {
          if (!p.mask[f][w][static_cast<std::size_t>(k)]) continue;
          const double target = p.target_us[f][w][static_cast<std::size_t>(k)];
          ratio_sum += std::abs(pred[static_cast<std::size_t>(k)] - target) / target;
          ++n;
        }
      }
    }
  }
  if (n == 0) throw Error("no valid targets");
  return 100.0 * ratio_sum / static_cast<double>(n);
}

std::vector<PreparedScenario> prepare_all(const std::vector<Scenario>& scenarios,
                                          const std::vector<GroundTruth>& truth,
                                          const char* which) {
  if (scenarios.empty()) throw ConfigError(std::string(which) + " dataset is empty");
  if (scenarios.size() != truth.size())
    throw ConfigError(std::string(which) + " dataset has " + std::to_string(scenarios.size()) +
                      " scenarios but " + std::to_string(truth.size()) + " ground-truth entries");
  std::vector<PreparedScenario> out;
  out.reserve(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    out.push_back(prepare_scenario(scenarios[i], truth[i],
                                   std::string(which) + " scenario " + std::to_string(i)));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

TrainResult train(const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const std::vector<Scenario>& train_scenarios,
                  const std::vector<GroundTruth>& train_truth,
                  const std::vector<Scenario>& val_scenarios,
                  const std::vector<GroundTruth>& val_truth, const TrainProgressFn& progress) {
  validate_train_config(tcfg);

  const auto prepared_train = prepare_all(train_scenarios, train_truth, "train");
  const auto prepared_val = prepare_all(val_scenarios, val_truth, "val");

  const double window_s = train_scenarios.front().window_s;
  for (const auto* set : {&train_scenarios, &val_scenarios})
    for (const Scenario& s : *set)
      if (s.window_s != window_s)
        throw ConfigError("all scenarios must share one window_s; found " +
                          std::to_string(s.window_s) + " and " + std::to_string(window_s));

  std::int64_t train_cells = 0;
  for (const PreparedScenario& p : prepared_train) train_cells += p.valid_cells;
  if (train_cells == 0) throw Error("no valid targets in the training set");

  Model model = make_model(mcfg);
  init_model(model, tcfg.seed);
  model.window_s = window_s;

  // Normalizer statistics over every (flow, window) of the training split.
  {
    std::vector<std::vector<double>> rows;
    for (const PreparedScenario& p : prepared_train)
      for (std::size_t f = 0; f < p.feats.flow_avg_load.size(); ++f)
        for (std::size_t w = 0; w < p.feats.flow_avg_load[f].size(); ++w)
          rows.push_back({p.feats.flow_avg_load[f][w], p.feats.flow_packet_rate[f][w]});
    model.norm = fit_normalizer(rows);
  }

  AdamState adam;
  adam.init(model.store);
  double lr = tcfg.lr;

  Tape tape(&model.store);
  std::mt19937_64 pick = make_rng(tcfg.seed, 0x7EA1ULL);

  TrainResult result{model, 0, 0.0, {}};

  auto record = [&](EpochLog log) {
    result.history.push_back(log);
    if (progress) progress(result.history.back());
  };

  // Epoch 0: validation baseline of the freshly initialized parameters.
  double best_val = pooled_mape_pct(model, tape, prepared_val);
  result.model = model;
  result.best_epoch = 0;
  result.best_val_mape_pct = best_val;
  record({0, std::nullopt, best_val, lr, false, false});

  int since_improvement = 0;
  for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    std::int64_t loss_terms = 0;
    for (int step = 0; step < tcfg.steps_per_epoch; ++step) {
      model.store.zero_grad();
      for (int b = 0; b < tcfg.batch_scenarios; ++b) {
        const auto idx = static_cast<std::size_t>(
            uniform_int(pick, 0, static_cast<std::int64_t>(prepared_train.size()) - 1));
        tape.reset();
        const auto [loss, cells] = scenario_loss(model, tape, prepared_train[idx]);
        (void)cells;
        const double loss_val = tape.value(loss)[0];
        if (!std::isfinite(loss_val))
          throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                      ", step " + std::to_string(step + 1) + " (scenario " + std::to_string(idx) +
                      "); lower the learning rate");
        tape.backward(loss);
        loss_sum += loss_val;
        ++loss_terms;
      }
      if (tcfg.batch_scenarios > 1) {
        const double inv = 1.0 / static_cast<double>(tcfg.batch_scenarios);
        for (int e = 0; e < model.store.size(); ++e)
          for (double& g : model.store[e].grad.data) g *= inv;
      }
      adam.update(model.store, lr);
    }

    const double val = pooled_mape_pct(model, tape, prepared_val);
    const bool improved = val < best_val;
    if (improved) {
      best_val = val;
      result.model = model;
      result.best_epoch = epoch;
      result.best_val_mape_pct = val;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    bool halved = false;
    if (since_improvement >= tcfg.plateau_patience) {
      lr *= tcfg.plateau_factor;  // takes effect from the next epoch's steps
      since_improvement = 0;
      halved = true;
    }
    record({epoch, loss_sum / static_cast<double>(loss_terms), val,
            halved ? lr / tcfg.plateau_factor : lr, improved, halved});
  }

  return result;
}

std::string train_history_to_json_text(const TrainResult& r) {
  ordered_json j;
  j["best_epoch"] = r.best_epoch;
  j["best_val_mape_pct"] = r.best_val_mape_pct;
  ordered_json rows = ordered_json::array();
  for (const EpochLog& e : r.history) {
    ordered_json row;
    row["epoch"] = e.epoch;
    if (e.mean_train_loss)
      row["mean_train_loss"] = *e.mean_train_loss;
    else
      row["mean_train_loss"] = nullptr;
    row["val_mape_pct"] = e.val_mape_pct;
    row["lr"] = e.lr;
    row["improved"] = e.improved;
    row["plateau_halved"] = e.plateau_halved;
    rows.push_back(std::move(row));
  }
  j["epochs"] = std::move(rows);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

std::string statistic_name(int k) {
  return std::string(k < 5 ? "delay." : "jitter.") + kStatNames[static_cast<std::size_t>(k % 5)];
}

}  // namespace

EvalReport evaluate(const Model& m, const std::vector<Scenario>& scenarios,
                    const std::vector<GroundTruth>& truth, std::string* residuals_csv) {
  if (scenarios.empty()) throw ConfigError("evaluate: empty scenario list");
  if (scenarios.size() != truth.size())
    throw ConfigError("evaluate: " + std::to_string(scenarios.size()) + " scenarios but " +
                      std::to_string(truth.size()) + " ground-truth entries");

  std::array<std::vector<double>, kNumTargets> preds, targets;
  std::ostringstream csv;
  csv.precision(17);
  if (residuals_csv != nullptr) csv << "scenario,flow,window,statistic,target,prediction\n";

  std::vector<double> scenario_times;
  const auto t_all0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Prediction pred = predict_scenario(m, scenarios[i]);
    scenario_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    const GroundTruth& gt = truth[i];
    for (const auto& [flow_id, windows] : pred.flows) {
      const auto it = gt.flows.find(flow_id);
      if (it == gt.flows.end()) continue;
      for (std::size_t w = 0; w < windows.size() && w < it->second.size(); ++w) {
        const FlowWindowTruth& cell = it->second[w];
        auto emit = [&](int base, const std::optional<WindowStats>& stats) {
          if (!stats) return;
          const std::array<double, 5> vals{stats->avg, stats->median, stats->p90, stats->p95,
                                           stats->p99};
          for (int k = 0; k < 5; ++k) {
            const double target = vals[static_cast<std::size_t>(k)];
            if (!(target > 0.0)) continue;
            const double p = windows[w][static_cast<std::size_t>(base + k)];
            preds[static_cast<std::size_t>(base + k)].push_back(p);
            targets[static_cast<std::size_t>(base + k)].push_back(target);
            if (residuals_csv != nullptr)
              csv << i << ',' << flow_id << ',' << w << ',' << statistic_name(base + k) << ','
                  << target << ',' << p << '\n';
          }
        };
        emit(0, cell.delay);
        emit(5, cell.jitter);
      }
    }
  }

  EvalReport report;
  double ratio_sum = 0.0;
  for (int k = 0; k < kNumTargets; ++k) {
    const auto& p = preds[static_cast<std::size_t>(k)];
    const auto& t = targets[static_cast<std::size_t>(k)];
    report.rows.push_back({statistic_name(k), compute_metrics(p, t)});
    report.overall_count += static_cast<std::int64_t>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) ratio_sum += std::abs(p[i] - t[i]) / t[i];
  }
  if (report.overall_count == 0) throw Error("no valid targets");
  report.overall_mape_pct = 100.0 * ratio_sum / static_cast<double>(report.overall_count);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_all0).count();
  std::sort(scenario_times.begin(), scenario_times.end());
  const std::size_t n = scenario_times.size();
  report.median_scenario_time_s =
      n % 2 == 1 ? scenario_times[n / 2] : 0.5 * (scenario_times[n / 2 - 1] + scenario_times[n / 2]);
  if (residuals_csv != nullptr) *residuals_csv = csv.str();
  return report;
}

std::string eval_report_to_json_text(const EvalReport& r) {
  ordered_json j;
  j["format"] = "flow-eval-report";
  j["version"] = 1;
  ordered_json rows = ordered_json::array();
  for (const MetricRow& row : r.rows) {
    ordered_json o;
    o["statistic"] = row.statistic;
    o["count"] = row.metrics.count;
    o["mape_pct"] = row.metrics.mape_pct ? ordered_json(*row.metrics.mape_pct) : ordered_json();
    o["mae_s"] = row.metrics.mae ? ordered_json(*row.metrics.mae) : ordered_json();
    o["r2"] = row.metrics.r2 ? ordered_json(*row.metrics.r2) : ordered_json();
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  j["overall"] = {{"count", r.overall_count}, {"mape_pct", r.overall_mape_pct}};
  j["timing"] = {{"wall_s", r.wall_time_s}, {"median_scenario_s", r.median_scenario_time_s}};
  return j.dump(2) + "\n";
}

std::string eval_report_table(const EvalReport& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-14s %8s %10s %12s %9s\n", "statistic", "count", "MAPE(%)",
                "MAE(s)", "R2");
  out << line;
  auto opt = [](const std::optional<double>& v, const char* fmt) {
    char buf[32];
    if (!v) return std::string("-");
    std::snprintf(buf, sizeof buf, fmt, *v);
    return std::string(buf);
  };
  for (const MetricRow& row : r.rows) {
    std::snprintf(line, sizeof line, "%-14s %8lld %10s %12s %9s\n", row.statistic.c_str(),
                  static_cast<long long>(row.metrics.count),
                  opt(row.metrics.mape_pct, "%.3f").c_str(), opt(row.metrics.mae, "%.3e").c_str(),
                  opt(row.metrics.r2, "%.4f").c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-14s %8lld %10.3f %12s %9s\n", "overall",
                static_cast<long long>(r.overall_count), r.overall_mape_pct, "-", "-");
  out << line;
  return out.str();
}

// ---------------------------------------------------------------------------
// Inference benchmarking
// ---------------------------------------------------------------------------

BenchRow bench_inference(const Model& m, const Scenario& s, int reps, const std::string& label) {
  if (reps < 3) throw ConfigError("bench_inference needs at least 3 repetitions");
  validate(s);

  BenchRow row;
  row.label = label;
  row.devices = static_cast<int>(s.devices.size());
  row.flows = static_cast<int>(s.flows.size());
  row.windows = s.window_count();
  for (const Flow& f : s.flows)
    row.packets += static_cast<std::int64_t>(generate_packets(f, s.duration_s).size());

  // The clock covers the model forward only: aggregated features are the
  // model's deployment-time input, so their construction stays untimed.
  const ExpandedGraph g = build_expanded_graph(s);
  const WindowFeatures f = compute_window_features(s);
  Tape tape(const_cast<ParamStore*>(&m.store));
  double sink = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    tape.reset();
    const auto t0 = std::chrono::steady_clock::now();
    const ForwardResult fwd = forward_on_tape(m, tape, g, f);
    for (const auto& flow : fwd.y)
      for (Tape::Id id : flow) sink += tape.value(id)[0];
    row.times_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  if (!std::isfinite(sink)) row.label += " (non-finite outputs)";

  std::vector<double> sorted = row.times_s;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  row.median_s = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return row;
}

std::string bench_to_json_text(const std::vector<BenchRow>& rows) {
  ordered_json j;
  j["format"] = "flow-bench";
  j["version"] = 1;
  ordered_json arr = ordered_json::array();
  for (const BenchRow& r : rows) {
    ordered_json o;
    o["label"] = r.label;
    o["devices"] = r.devices;
    o["flows"] = r.flows;
    o["windows"] = r.windows;
    o["packets"] = r.packets;
    o["median_s"] = r.median_s;
    o["times_s"] = r.times_s;
    arr.push_back(std::move(o));
  }
  j["rows"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %8s %6s %8s %10s %12s\n", "label", "devices", "flows",
                "windows", "packets", "median(s)");
  out << line;
  for (const BenchRow& r : rows) {
    std::snprintf(line, sizeof line, "%-24s %8d %6d %8d %10lld %12.6f\n", r.label.c_str(),
                  r.devices, r.flows, r.windows, static_cast<long long>(r.packets), r.median_s);
    out << line;
  }
  return out.str();
}

}  // namespace flowcast
