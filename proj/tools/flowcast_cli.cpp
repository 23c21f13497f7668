// SPDX-License-Identifier: Apache-2.0
//
// flowcast — command-line front end for the flow-level performance model.
//
// Wires the pipeline generate -> simulate -> train -> predict -> evaluate ->
// bench over the C API.  Narrative output goes to stderr; result tables go to
// stdout.  Exit codes: 0 success, 1 runtime/validation failure, 2 usage error.
#include <flowcast.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct GlobalOpts {
  long long seed = -1;  // -1 = not given
  int jobs = 1;
  bool quiet = false;
};

int usage_error(const std::string& message) {
  std::fprintf(stderr, "error: %s\nRun with --help for usage.\n", message.c_str());
  return 2;
}

int runtime_error_exit() {
  std::fprintf(stderr, "error: %s\n", fc_last_error());
  return 1;
}

void note(const GlobalOpts& g, const std::string& message) {
  if (!g.quiet) std::fprintf(stderr, "%s\n", message.c_str());
}

// Atomic file write for run manifests: temp sibling + rename.
bool write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << text;
    out.flush();
    if (!out) return false;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  return !ec;
}

// Every successful run records what ran, with what inputs and outputs,
// next to the artifacts it produced.
struct RunManifest {
  std::string subcommand;
  ordered_json config = ordered_json::object();
  std::optional<long long> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_time_s = 0.0;

  bool write(const std::string& path) const {
    ordered_json j;
    j["format"] = "flow-run-manifest";
    j["version"] = 1;
    j["tool_version"] = fc_version();
    j["subcommand"] = subcommand;
    j["config"] = config;
    if (seed.has_value()) j["seed"] = *seed;
    else j["seed"] = nullptr;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["wall_time_s"] = wall_time_s;
    return write_file_atomic(path, j.dump(2) + "\n");
  }
};

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

bool parse_ratios(const std::string& text, double out[3]) {
  std::istringstream stream(text);
  std::string token;
  int k = 0;
  while (std::getline(stream, token, ',')) {
    if (k >= 3) return false;
    std::size_t used = 0;
    try {
      out[k] = std::stod(token, &used);
    } catch (const std::exception&) {
      return false;
    }
    if (used != token.size()) return false;
    ++k;
  }
  return k == 3;
}

struct ProgressCtx {
  bool quiet = false;
};

}  // namespace

extern "C" void flowcast_cli_progress(const fc_epoch_log* log, void* user) {
  const auto* ctx = static_cast<const ProgressCtx*>(user);
  if (ctx->quiet) return;
  if (log->has_train_loss == 0) {
    std::fprintf(stderr, "epoch %3d                     val MAPE %9.3f%%  (baseline)\n",
                 log->epoch, log->val_mape_pct);
    return;
  }
  std::fprintf(stderr, "epoch %3d  train loss %8.4f  val MAPE %9.3f%%  lr %.2e%s%s\n",
               log->epoch, log->mean_train_loss, log->val_mape_pct, log->lr,
               log->improved != 0 ? "  *" : "", log->plateau_halved != 0 ? "  [lr halved]" : "");
}

int main(int argc, char** argv) {
  CLI::App app{"flowcast — flow-level network performance prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fc_version());

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Seed for every random choice (required by generate/train)");
  app.add_option("--jobs", g.jobs, "Worker threads for scenario-level parallelism")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress progress and narrative output");

  // generate
  auto* cmd_generate = app.add_subcommand("generate", "Generate a scenario dataset directory");
  std::string gen_config, gen_out, gen_split = "0.75,0.15,0.10";
  cmd_generate->add_option("--config", gen_config, "Generator config JSON file")->required();
  cmd_generate->add_option("--out", gen_out, "Output dataset directory")->required();
  cmd_generate->add_option("--split", gen_split, "train,val,test ratios (default 0.75,0.15,0.10)");

  // simulate
  auto* cmd_simulate =
      app.add_subcommand("simulate", "Simulate a dataset packet by packet for ground truth");
  std::string sim_dataset, sim_out;
  bool sim_packets_csv = false;
  cmd_simulate->add_option("--dataset", sim_dataset, "Dataset directory")->required();
  cmd_simulate->add_option("--out", sim_out, "Output directory for ground-truth files")->required();
  cmd_simulate->add_flag("--packets-csv", sim_packets_csv, "Also write per-packet CSV files");

  // train
  auto* cmd_train = app.add_subcommand("train", "Train the flow model on a simulated dataset");
  std::string tr_dataset, tr_truth, tr_out, tr_preset, tr_config;
  int tr_epochs = 0, tr_steps = 0, tr_state_dim = 0, tr_iterations = 0;
  double tr_lr = 0.0;
  cmd_train->add_option("--dataset", tr_dataset, "Dataset directory")->required();
  cmd_train->add_option("--truth", tr_truth, "Ground-truth directory (from simulate)")->required();
  cmd_train->add_option("--out", tr_out, "Output directory (checkpoint.json, history.json)")
      ->required();
  cmd_train->add_option("--preset", tr_preset, "Size preset: desk or paper");
  cmd_train->add_option("--train-config", tr_config, "Training config JSON file (overrides preset)");
  cmd_train->add_option("--epochs", tr_epochs, "Override: training epochs");
  cmd_train->add_option("--steps", tr_steps, "Override: gradient steps per epoch");
  cmd_train->add_option("--lr", tr_lr, "Override: initial learning rate");
  cmd_train->add_option("--state-dim", tr_state_dim, "Override: model state width");
  cmd_train->add_option("--iterations", tr_iterations, "Override: message-passing rounds");

  // predict
  auto* cmd_predict =
      app.add_subcommand("predict", "Predict per-flow per-window statistics for one scenario");
  std::string pr_checkpoint, pr_scenario, pr_out;
  cmd_predict->add_option("--checkpoint", pr_checkpoint, "Model checkpoint file")->required();
  cmd_predict->add_option("--scenario", pr_scenario, "Scenario JSON file")->required();
  cmd_predict->add_option("--out", pr_out, "Output predictions JSON file")->required();

  // evaluate
  auto* cmd_evaluate =
      app.add_subcommand("evaluate", "Score a checkpoint against simulated ground truth");
  std::string ev_checkpoint, ev_dataset, ev_truth, ev_out, ev_split = "test";
  cmd_evaluate->add_option("--checkpoint", ev_checkpoint, "Model checkpoint file")->required();
  cmd_evaluate->add_option("--dataset", ev_dataset, "Dataset directory")->required();
  cmd_evaluate->add_option("--truth", ev_truth, "Ground-truth directory")->required();
  cmd_evaluate->add_option("--out", ev_out, "Output directory (eval_report.json, residuals.csv)")
      ->required();
  cmd_evaluate->add_option("--split", ev_split, "Dataset split: train, val, test, or all");

  // bench
  auto* cmd_bench = app.add_subcommand("bench", "Time repeated forward passes over a scenario");
  std::string be_checkpoint, be_scenario, be_out, be_sweep;
  int be_reps = 9;
  cmd_bench->add_option("--checkpoint", be_checkpoint, "Model checkpoint file")->required();
  cmd_bench->add_option("--scenario", be_scenario, "Scenario JSON file")->required();
  cmd_bench->add_option("--out", be_out, "Output directory (bench.json)")->required();
  cmd_bench->add_option("--reps", be_reps, "Timed repetitions per row (>= 3)");
  cmd_bench->add_option("--sweep", be_sweep,
                        "Vary the scenario, e.g. packets=1x,10x,100x scales traffic intensity");

  // Let --seed/--jobs/--quiet appear before or after the subcommand name.
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough(true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const bool seed_given = app.count("--seed") > 0;
  if (seed_given && g.seed < 0) return usage_error("--seed must be >= 0");

  Stopwatch watch;
  RunManifest manifest;
  manifest.config["jobs"] = g.jobs;
  if (seed_given) manifest.seed = g.seed;

  if (cmd_generate->parsed()) {
    if (!seed_given) return usage_error("generate requires --seed (runs are reproducible only by explicit seed)");
    double ratios[3];
    if (!parse_ratios(gen_split, ratios))
      return usage_error("--split must be three comma-separated numbers, e.g. 0.75,0.15,0.10");
    int32_t count = 0;
    if (fc_generate(gen_config.c_str(), g.seed, ratios[0], ratios[1], ratios[2], g.jobs,
                    gen_out.c_str(), &count) != FC_OK)
      return runtime_error_exit();
    manifest.subcommand = "generate";
    manifest.config["config"] = gen_config;
    manifest.config["split"] = gen_split;
    manifest.inputs = {gen_config};
    manifest.outputs = {gen_out};
    manifest.wall_time_s = watch.seconds();
    if (!manifest.write(gen_out + "/run_manifest.json"))
      return usage_error("cannot write run manifest in " + gen_out);
    note(g, "generated " + std::to_string(count) + " scenarios -> " + gen_out);
    return 0;
  }

  if (cmd_simulate->parsed()) {
    int32_t count = 0;
    if (fc_simulate(sim_dataset.c_str(), sim_out.c_str(), sim_packets_csv ? 1 : 0, g.jobs,
                    &count) != FC_OK)
      return runtime_error_exit();
    manifest.subcommand = "simulate";
    manifest.config["dataset"] = sim_dataset;
    manifest.config["packets_csv"] = sim_packets_csv;
    manifest.inputs = {sim_dataset};
    manifest.outputs = {sim_out};
    manifest.wall_time_s = watch.seconds();
    if (!manifest.write(sim_out + "/run_manifest.json"))
      return usage_error("cannot write run manifest in " + sim_out);
    note(g, "simulated " + std::to_string(count) + " scenarios -> " + sim_out);
    return 0;
  }

  if (cmd_train->parsed()) {
    if (!seed_given) return usage_error("train requires --seed (runs are reproducible only by explicit seed)");
    ordered_json overrides = ordered_json::object();
    if (!tr_config.empty()) {
      std::ifstream in(tr_config, std::ios::binary);
      if (!in) return usage_error("cannot read --train-config file " + tr_config);
      try {
        overrides = ordered_json::parse(std::string(std::istreambuf_iterator<char>(in), {}));
      } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s: %s\n", tr_config.c_str(), e.what());
        return 1;
      }
    }
    if (cmd_train->count("--epochs") > 0) overrides["max_epochs"] = tr_epochs;
    if (cmd_train->count("--steps") > 0) overrides["steps_per_epoch"] = tr_steps;
    if (cmd_train->count("--lr") > 0) overrides["lr"] = tr_lr;
    const std::string overrides_text = overrides.empty() ? std::string() : overrides.dump();

    std::error_code ec;
    fs::create_directories(tr_out, ec);
    if (ec) return usage_error("cannot create output directory " + tr_out);
    const std::string checkpoint_path = tr_out + "/checkpoint.json";
    const std::string history_path = tr_out + "/history.json";

    ProgressCtx ctx{g.quiet};
    int32_t best_epoch = 0;
    double best_val = 0.0;
    if (fc_train(tr_dataset.c_str(), tr_truth.c_str(),
                 tr_preset.empty() ? nullptr : tr_preset.c_str(),
                 overrides_text.empty() ? nullptr : overrides_text.c_str(), tr_state_dim,
                 tr_iterations, g.seed, checkpoint_path.c_str(), history_path.c_str(),
                 flowcast_cli_progress, &ctx, &best_epoch, &best_val) != FC_OK)
      return runtime_error_exit();

    manifest.subcommand = "train";
    manifest.config["dataset"] = tr_dataset;
    manifest.config["truth"] = tr_truth;
    manifest.config["preset"] = tr_preset;
    manifest.config["train_overrides"] =
        overrides_text.empty() ? ordered_json::object() : overrides;
    manifest.config["state_dim"] = tr_state_dim;
    manifest.config["iterations"] = tr_iterations;
    manifest.config["best_epoch"] = best_epoch;
    manifest.config["best_val_mape_pct"] = best_val;
    manifest.inputs = {tr_dataset, tr_truth};
    manifest.outputs = {checkpoint_path, history_path};
    manifest.wall_time_s = watch.seconds();
    if (!manifest.write(tr_out + "/run_manifest.json"))
      return usage_error("cannot write run manifest in " + tr_out);
    char line[160];
    std::snprintf(line, sizeof line, "best epoch %d  val MAPE %.3f%%  -> %s", best_epoch,
                  best_val, checkpoint_path.c_str());
    note(g, line);
    return 0;
  }

  if (cmd_predict->parsed()) {
    if (fc_predict(pr_checkpoint.c_str(), pr_scenario.c_str(), pr_out.c_str()) != FC_OK)
      return runtime_error_exit();
    manifest.subcommand = "predict";
    manifest.config["checkpoint"] = pr_checkpoint;
    manifest.config["scenario"] = pr_scenario;
    manifest.inputs = {pr_checkpoint, pr_scenario};
    manifest.outputs = {pr_out};
    manifest.wall_time_s = watch.seconds();
    if (!manifest.write(pr_out + ".manifest.json"))
      return usage_error("cannot write run manifest next to " + pr_out);
    note(g, "predictions -> " + pr_out);
    return 0;
  }

  if (cmd_evaluate->parsed()) {
    std::error_code ec;
    fs::create_directories(ev_out, ec);
    if (ec) return usage_error("cannot create output directory " + ev_out);
    const std::string report_path = ev_out + "/eval_report.json";
    const std::string residuals_path = ev_out + "/residuals.csv";
    char* table = nullptr;
    double overall = 0.0;
    if (fc_evaluate(ev_checkpoint.c_str(), ev_dataset.c_str(), ev_truth.c_str(),
                    ev_split.c_str(), report_path.c_str(), residuals_path.c_str(), &table,
                    &overall) != FC_OK)
      return runtime_error_exit();
    std::fputs(table, stdout);
    fc_text_free(table);
    manifest.subcommand = "evaluate";
    manifest.config["checkpoint"] = ev_checkpoint;
    manifest.config["dataset"] = ev_dataset;
    manifest.config["truth"] = ev_truth;
    manifest.config["split"] = ev_split;
    manifest.config["overall_mape_pct"] = overall;
    manifest.inputs = {ev_checkpoint, ev_dataset, ev_truth};
    manifest.outputs = {report_path, residuals_path};
    manifest.wall_time_s = watch.seconds();
    if (!manifest.write(ev_out + "/run_manifest.json"))
      return usage_error("cannot write run manifest in " + ev_out);
    return 0;
  }

  if (cmd_bench->parsed()) {
    std::string multipliers;
    if (!be_sweep.empty()) {
      const std::string prefix = "packets=";
      if (be_sweep.rfind(prefix, 0) != 0)
        return usage_error("--sweep must look like packets=1x,10x,100x");
      multipliers = be_sweep.substr(prefix.size());
    }
    std::error_code ec;
    fs::create_directories(be_out, ec);
    if (ec) return usage_error("cannot create output directory " + be_out);
    const std::string json_path = be_out + "/bench.json";
    char* table = nullptr;
    if (fc_bench(be_checkpoint.c_str(), be_scenario.c_str(), be_reps,
                 multipliers.empty() ? nullptr : multipliers.c_str(), json_path.c_str(),
                 &table) != FC_OK)
      return runtime_error_exit();
    std::fputs(table, stdout);
    fc_text_free(table);
    manifest.subcommand = "bench";
    manifest.config["checkpoint"] = be_checkpoint;
    manifest.config["scenario"] = be_scenario;
    manifest.config["reps"] = be_reps;
    manifest.config["sweep"] = be_sweep;
    manifest.inputs = {be_checkpoint, be_scenario};
    manifest.outputs = {json_path};
    manifest.wall_time_s = watch.seconds();
    if (!manifest.write(be_out + "/run_manifest.json"))
      return usage_error("cannot write run manifest in " + be_out);
    return 0;
  }

  return usage_error("no subcommand given");
}
