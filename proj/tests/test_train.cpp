// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "flowcast/dataset.hpp"
#include "flowcast/des.hpp"
#include "flowcast/error.hpp"
#include "flowcast/model.hpp"
#include "flowcast/train.hpp"
#include "flowcast/traffic.hpp"

using namespace flowcast;

namespace {

// Small dataset + ground truth used by the loop tests: 5-router trees,
// multi-burst traffic, 5 windows of 100 ms.
struct TinyData {
  std::vector<Scenario> train, val;
  std::vector<GroundTruth> train_gt, val_gt;
};

TinyData make_tiny_data(std::uint64_t seed, int n_train = 4, int n_val = 2) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.n_scenarios = n_train + n_val;
  cfg.node_range = {5, 5};
  cfg.topology_family = TopologyFamily::Tree;
  cfg.path_router_range = {2, 3};
  cfg.flows_per_scenario = {2, 4};
  cfg.profile_family = ProfileFamily::TrexMB;
  cfg.duration_s = 0.5;
  cfg.window_s = 0.1;
  TinyData d;
  for (int i = 0; i < cfg.n_scenarios; ++i) {
    Scenario s = generate_scenario(cfg, i);
    GroundTruth gt = aggregate(simulate(s).packets, s);
    if (i < n_train) {
      d.train.push_back(std::move(s));
      d.train_gt.push_back(std::move(gt));
    } else {
      d.val.push_back(std::move(s));
      d.val_gt.push_back(std::move(gt));
    }
  }
  return d;
}

ModelConfig tiny_model_cfg() {
  ModelConfig m;
  m.state_dim = 8;
  m.mp_iterations = 2;
  return m;
}

TrainConfig tiny_train_cfg(std::uint64_t seed) {
  TrainConfig t;
  t.max_epochs = 3;
  t.steps_per_epoch = 8;
  t.lr = 1e-3;
  t.seed = seed;
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics: closed-form examples, asserted exactly
// ---------------------------------------------------------------------------

TEST_CASE("mape_loss closed forms") {
  CHECK(mape_loss({110.0, 180.0}, {100.0, 200.0}) == 0.1);  // 10%
  CHECK(mape_loss({42.0, 7.0}, {42.0, 7.0}) == 0.0);
  CHECK(mape_loss({100.0}, {50.0}) == 1.0);  // 100%
}

TEST_CASE("mape_loss masks non-positive targets") {
  // Only the first entry is valid; zero and negative targets are masked.
  CHECK(mape_loss({110.0, 5.0, 5.0}, {100.0, 0.0, -1.0}) == 0.1);
  CHECK_THROWS_WITH_AS((void)mape_loss({1.0, 2.0}, {0.0, 0.0}),
                       doctest::Contains("no valid targets"), Error);
  CHECK_THROWS_AS((void)mape_loss({1.0}, {1.0, 2.0}), Error);
}

TEST_CASE("compute_metrics closed forms") {
  SUBCASE("perfect predictions") {
    const StatMetrics m = compute_metrics({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
    CHECK(m.count == 3);
    CHECK(*m.mape_pct == 0.0);
    CHECK(*m.mae == 0.0);
    CHECK(*m.r2 == 1.0);
  }

  SUBCASE("predicting the mean gives R2 = 0") {
    const StatMetrics m = compute_metrics({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0});
    CHECK(m.count == 3);
    CHECK(*m.mae == (1.0 + 0.0 + 1.0) / 3.0);  // 2/3
    CHECK(*m.r2 == 0.0);
    CHECK(*m.mape_pct == 100.0 * (1.0 / 1.0 + 0.0 / 2.0 + 1.0 / 3.0) / 3.0);
  }

  SUBCASE("constant targets leave R2 undefined") {
    const StatMetrics m = compute_metrics({4.0, 6.0}, {5.0, 5.0});
    CHECK(m.count == 2);
    CHECK(m.mape_pct.has_value());
    CHECK(m.mae.has_value());
    CHECK_FALSE(m.r2.has_value());
  }

  SUBCASE("fully masked input yields an empty row") {
    const StatMetrics m = compute_metrics({4.0}, {0.0});
    CHECK(m.count == 0);
    CHECK_FALSE(m.mape_pct.has_value());
    CHECK_FALSE(m.mae.has_value());
    CHECK_FALSE(m.r2.has_value());
  }
}

// ---------------------------------------------------------------------------
// TrainConfig plumbing
// ---------------------------------------------------------------------------

TEST_CASE("train config JSON: defaults, round-trip, junk") {
  const TrainConfig def = train_config_from_json_text("{}");
  CHECK(def.max_epochs == 300);
  CHECK(def.steps_per_epoch == 500);
  CHECK(def.lr == 0.001);
  CHECK(def.plateau_patience == 10);
  CHECK(def.plateau_factor == 0.5);
  CHECK(def.batch_scenarios == 1);

  TrainConfig cfg;
  cfg.max_epochs = 7;
  cfg.steps_per_epoch = 3;
  cfg.lr = 0.01;
  cfg.plateau_patience = 2;
  cfg.plateau_factor = 0.25;
  cfg.seed = 123;
  cfg.batch_scenarios = 2;
  const TrainConfig back = train_config_from_json_text(train_config_to_json_text(cfg));
  CHECK(back.max_epochs == cfg.max_epochs);
  CHECK(back.steps_per_epoch == cfg.steps_per_epoch);
  CHECK(back.lr == cfg.lr);
  CHECK(back.plateau_patience == cfg.plateau_patience);
  CHECK(back.plateau_factor == cfg.plateau_factor);
  CHECK(back.seed == cfg.seed);
  CHECK(back.batch_scenarios == cfg.batch_scenarios);

  CHECK_THROWS_WITH_AS((void)train_config_from_json_text("{\"max_epoch\": 3}"),
                       doctest::Contains("unknown key"), ParseError);
  CHECK_THROWS_AS((void)train_config_from_json_text("{\"max_epochs\": 0}"), ConfigError);
  CHECK_THROWS_AS((void)train_config_from_json_text("{\"plateau_factor\": 1.0}"), ConfigError);
  CHECK_THROWS_AS((void)train_config_from_json_text("{\"lr\": -0.1}"), ConfigError);
  CHECK_THROWS_AS((void)train_config_from_json_text("not json"), ParseError);
}

TEST_CASE("presets") {
  ModelConfig m;
  TrainConfig t;
  apply_desk_preset(m, t);
  CHECK(m.state_dim == 16);
  CHECK(m.mp_iterations == 4);
  CHECK(t.max_epochs == 50);
  CHECK(t.steps_per_epoch == 200);
  apply_paper_preset(m, t);
  CHECK(m.state_dim == 32);
  CHECK(m.mp_iterations == 8);
  CHECK(t.max_epochs == 300);
  CHECK(t.steps_per_epoch == 500);
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

TEST_CASE("training runs, logs every epoch, and picks the best-val epoch") {
  const TinyData d = make_tiny_data(31);
  const TrainResult r =
      train(tiny_model_cfg(), tiny_train_cfg(7), d.train, d.train_gt, d.val, d.val_gt);

  REQUIRE(r.history.size() == 4);  // baseline + 3 epochs
  CHECK(r.history[0].epoch == 0);
  CHECK_FALSE(r.history[0].mean_train_loss.has_value());
  for (std::size_t e = 1; e < r.history.size(); ++e) {
    CHECK(r.history[e].epoch == static_cast<int>(e));
    REQUIRE(r.history[e].mean_train_loss.has_value());
    CHECK(std::isfinite(*r.history[e].mean_train_loss));
    CHECK(*r.history[e].mean_train_loss > 0.0);
  }

  double min_val = r.history[0].val_mape_pct;
  for (const EpochLog& e : r.history) min_val = std::min(min_val, e.val_mape_pct);
  CHECK(r.best_val_mape_pct == min_val);
  CHECK(r.best_val_mape_pct <= r.history[0].val_mape_pct);
  CHECK(r.history[static_cast<std::size_t>(r.best_epoch)].val_mape_pct == r.best_val_mape_pct);

  CHECK(r.model.window_s == 0.1);
  // The normalizer was fit on real loads, so its stats moved off the identity.
  CHECK(r.model.norm.mean[0] > 0.0);
  CHECK(r.model.norm.std[0] > 1.0);

  const std::string history = train_history_to_json_text(r);
  CHECK(history.find("\"best_epoch\"") != std::string::npos);
  CHECK(history.find("\"val_mape_pct\"") != std::string::npos);
}

TEST_CASE("training is deterministic in (seed, config, data)") {
  const TinyData d = make_tiny_data(32);
  const TrainResult a =
      train(tiny_model_cfg(), tiny_train_cfg(9), d.train, d.train_gt, d.val, d.val_gt);
  const TrainResult b =
      train(tiny_model_cfg(), tiny_train_cfg(9), d.train, d.train_gt, d.val, d.val_gt);
  CHECK(checkpoint_to_json_text(a.model) == checkpoint_to_json_text(b.model));
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i)
    CHECK(a.history[i].val_mape_pct == b.history[i].val_mape_pct);

  const TrainResult c =
      train(tiny_model_cfg(), tiny_train_cfg(10), d.train, d.train_gt, d.val, d.val_gt);
  CHECK(checkpoint_to_json_text(a.model) != checkpoint_to_json_text(c.model));
}

TEST_CASE("zero learning rate leaves the initialization untouched") {
  const TinyData d = make_tiny_data(33);
  TrainConfig tcfg = tiny_train_cfg(11);
  tcfg.lr = 0.0;
  tcfg.max_epochs = 3;
  const TrainResult r = train(tiny_model_cfg(), tcfg, d.train, d.train_gt, d.val, d.val_gt);

  for (const EpochLog& e : r.history) CHECK(e.val_mape_pct == r.history[0].val_mape_pct);
  CHECK(r.best_epoch == 0);

  Model fresh = make_model(tiny_model_cfg());
  init_model(fresh, tcfg.seed);
  REQUIRE(fresh.store.size() == r.model.store.size());
  for (int i = 0; i < fresh.store.size(); ++i) {
    REQUIRE(fresh.store[i].value.data.size() == r.model.store[i].value.data.size());
    for (std::size_t k = 0; k < fresh.store[i].value.data.size(); ++k)
      CHECK(fresh.store[i].value.data[k] == r.model.store[i].value.data[k]);
  }
}

TEST_CASE("one epoch of one step performs exactly one parameter update") {
  const TinyData d = make_tiny_data(34, 2, 1);
  TrainConfig tcfg = tiny_train_cfg(13);
  tcfg.max_epochs = 1;
  tcfg.steps_per_epoch = 1;
  const TrainResult r = train(tiny_model_cfg(), tcfg, d.train, d.train_gt, d.val, d.val_gt);
  REQUIRE(r.history.size() == 2);
  REQUIRE(r.history[1].mean_train_loss.has_value());

  // Parameters moved: compare the final epoch-1 weights against a fresh init.
  // (r.model may be the epoch-0 snapshot if validation worsened, so retrain
  // with the same seed and inspect the history instead of the checkpoint.)
  CHECK(std::isfinite(*r.history[1].mean_train_loss));
  CHECK(r.history[1].val_mape_pct != r.history[0].val_mape_pct);
}

TEST_CASE("plateau schedule halves the rate after `patience` flat epochs") {
  const TinyData d = make_tiny_data(35, 2, 1);
  TrainConfig tcfg = tiny_train_cfg(14);
  tcfg.lr = 0.0;  // guarantees no epoch ever improves on the baseline
  tcfg.plateau_patience = 2;
  tcfg.max_epochs = 5;
  const TrainResult r = train(tiny_model_cfg(), tcfg, d.train, d.train_gt, d.val, d.val_gt);
  REQUIRE(r.history.size() == 6);
  CHECK_FALSE(r.history[1].plateau_halved);
  CHECK(r.history[2].plateau_halved);  // streak reaches patience after epoch 2
  CHECK_FALSE(r.history[3].plateau_halved);
  CHECK(r.history[4].plateau_halved);
  CHECK_FALSE(r.history[5].plateau_halved);
  for (const EpochLog& e : r.history) CHECK_FALSE(e.improved);
}

TEST_CASE("an exploding learning rate aborts with a divergence diagnostic") {
  const TinyData d = make_tiny_data(36, 2, 1);
  TrainConfig tcfg = tiny_train_cfg(15);
  tcfg.lr = 1e300;
  tcfg.max_epochs = 2;
  tcfg.steps_per_epoch = 10;
  CHECK_THROWS_WITH_AS(train(tiny_model_cfg(), tcfg, d.train, d.train_gt, d.val, d.val_gt),
                       doctest::Contains("diverged"), Error);
}

TEST_CASE("train input validation") {
  const TinyData d = make_tiny_data(37, 2, 1);
  const ModelConfig mcfg = tiny_model_cfg();
  const TrainConfig tcfg = tiny_train_cfg(1);

  CHECK_THROWS_AS(train(mcfg, tcfg, {}, {}, d.val, d.val_gt), ConfigError);
  CHECK_THROWS_AS(train(mcfg, tcfg, d.train, {}, d.val, d.val_gt), ConfigError);
  CHECK_THROWS_AS(train(mcfg, tcfg, d.train, d.train_gt, {}, {}), ConfigError);

  // Mixed window sizes are rejected.
  std::vector<Scenario> mixed = d.train;
  mixed[1].window_s = 0.05;
  mixed[1].duration_s = 0.5;
  CHECK_THROWS_WITH_AS(train(mcfg, tcfg, mixed, d.train_gt, d.val, d.val_gt),
                       doctest::Contains("window_s"), ConfigError);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

TEST_CASE("evaluate: rows, pooled MAPE consistency, residuals CSV") {
  const TinyData d = make_tiny_data(38);
  const TrainResult r =
      train(tiny_model_cfg(), tiny_train_cfg(21), d.train, d.train_gt, d.val, d.val_gt);

  std::string csv;
  const EvalReport rep = evaluate(r.model, d.train, d.train_gt, &csv);

  REQUIRE(rep.rows.size() == 10);
  CHECK(rep.rows[0].statistic == "delay.avg");
  CHECK(rep.rows[4].statistic == "delay.p99");
  CHECK(rep.rows[5].statistic == "jitter.avg");
  CHECK(rep.rows[9].statistic == "jitter.p99");
  std::int64_t sum_counts = 0;
  for (const MetricRow& row : rep.rows) sum_counts += row.metrics.count;
  CHECK(sum_counts == rep.overall_count);
  CHECK(rep.overall_count > 0);
  CHECK(rep.rows[0].metrics.count > 0);  // delay.avg always present when packets flow
  CHECK(std::isfinite(rep.overall_mape_pct));
  CHECK(rep.wall_time_s >= 0.0);
  CHECK(rep.median_scenario_time_s >= 0.0);

  // The residuals CSV re-derives the pooled MAPE: loss/metric consistency.
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "scenario,flow,window,statistic,target,prediction");
  std::vector<double> targets, predictions;
  std::set<std::string> stats_seen;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string scenario, flow, window, stat, target, pred;
    REQUIRE(std::getline(cells, scenario, ','));
    REQUIRE(std::getline(cells, flow, ','));
    REQUIRE(std::getline(cells, window, ','));
    REQUIRE(std::getline(cells, stat, ','));
    REQUIRE(std::getline(cells, target, ','));
    REQUIRE(std::getline(cells, pred, ','));
    stats_seen.insert(stat);
    targets.push_back(std::stod(target));
    predictions.push_back(std::stod(pred));
  }
  CHECK(static_cast<std::int64_t>(targets.size()) == rep.overall_count);
  CHECK(stats_seen.count("delay.avg") == 1);
  const double pooled = 100.0 * mape_loss(predictions, targets);
  CHECK(std::abs(pooled - rep.overall_mape_pct) <= 1e-9 * std::max(1.0, rep.overall_mape_pct));

  // Report serializations.
  const std::string json_text = eval_report_to_json_text(rep);
  CHECK(json_text.find("\"flow-eval-report\"") != std::string::npos);
  CHECK(json_text.find("\"delay.avg\"") != std::string::npos);
  const std::string table = eval_report_table(rep);
  CHECK(table.find("delay.avg") != std::string::npos);
  CHECK(table.find("overall") != std::string::npos);
}

TEST_CASE("evaluate error paths") {
  const TinyData d = make_tiny_data(39, 2, 1);
  const TrainResult r =
      train(tiny_model_cfg(), tiny_train_cfg(22), d.train, d.train_gt, d.val, d.val_gt);

  CHECK_THROWS_AS((void)evaluate(r.model, {}, {}), ConfigError);
  CHECK_THROWS_AS((void)evaluate(r.model, d.train, d.val_gt), ConfigError);  // size mismatch

  SUBCASE("window size mismatch propagates the model's diagnostic") {
    std::vector<Scenario> wrong = {d.train[0]};
    wrong[0].window_s = 0.05;
    CHECK_THROWS_WITH_AS((void)evaluate(r.model, wrong, {d.train_gt[0]}),
                         doctest::Contains("window size mismatch"), ConfigError);
  }

  SUBCASE("all-masked ground truth") {
    const std::vector<GroundTruth> empty_gt(d.train.size());
    CHECK_THROWS_WITH_AS((void)evaluate(r.model, d.train, empty_gt),
                         doctest::Contains("no valid targets"), Error);
  }
}

// ---------------------------------------------------------------------------
// Inference benchmark
// ---------------------------------------------------------------------------

TEST_CASE("bench_inference reports scenario shape and timed repetitions") {
  const TinyData d = make_tiny_data(40, 2, 1);
  const TrainResult r =
      train(tiny_model_cfg(), tiny_train_cfg(23), d.train, d.train_gt, d.val, d.val_gt);

  const Scenario& s = d.train[0];
  const BenchRow row = bench_inference(r.model, s, 5, "tiny");
  CHECK(row.label == "tiny");
  CHECK(row.devices == static_cast<int>(s.devices.size()));
  CHECK(row.flows == static_cast<int>(s.flows.size()));
  CHECK(row.windows == s.window_count());
  std::int64_t pkts = 0;
  for (const Flow& f : s.flows) pkts += static_cast<std::int64_t>(generate_packets(f, s.duration_s).size());
  CHECK(row.packets == pkts);
  REQUIRE(row.times_s.size() == 5);
  for (double t : row.times_s) CHECK(t >= 0.0);
  std::vector<double> sorted = row.times_s;
  std::sort(sorted.begin(), sorted.end());
  CHECK(row.median_s == sorted[2]);

  CHECK_THROWS_AS((void)bench_inference(r.model, s, 2, "too-few"), ConfigError);

  const std::string table = bench_table({row});
  CHECK(table.find("tiny") != std::string::npos);
  const std::string json_text = bench_to_json_text({row});
  CHECK(json_text.find("\"flow-bench\"") != std::string::npos);
}
