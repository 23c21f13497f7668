// SPDX-License-Identifier: Apache-2.0
//
// Drives the installed command-line binary as a subprocess: exit codes,
// stdout/stderr contracts, run manifests, and pipeline idempotence.
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#ifndef FLOWCAST_CLI_PATH
#error "FLOWCAST_CLI_PATH must point at the CLI binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kGenConfig = R"({
  "seed": 3,
  "n_scenarios": 6,
  "node_range": [5, 6],
  "topology_family": "tree",
  "path_router_range": [2, 3],
  "flows_per_scenario": [2, 4],
  "profile_family": "trex_mb",
  "duration_s": 0.5,
  "window_s": 0.1
})";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << text;
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

struct Workspace {
  fs::path root;
  int runs = 0;

  Workspace() {
    root = fs::temp_directory_path() / "flowcast_cli_fixture";
    fs::remove_all(root);
    fs::create_directories(root);
    spit(root / "gen.json", kGenConfig);
  }

  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }

  RunResult run(const std::string& args) {
    const fs::path out_file = root / ("stdout_" + std::to_string(runs));
    const fs::path err_file = root / ("stderr_" + std::to_string(runs));
    ++runs;
    const std::string cmd = std::string(FLOWCAST_CLI_PATH) + " " + args + " >" +
                            out_file.string() + " 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
  }

  std::string arg(const fs::path& p) const { return p.string(); }
};

// Shared fixture: the full pipeline runs once; later cases inspect it.
struct SharedPipeline {
  Workspace ws;
  fs::path ds, truth, run_dir;

  SharedPipeline() {
    ds = ws.root / "ds";
    truth = ws.root / "truth";
    run_dir = ws.root / "run";
    RunResult r = ws.run("generate --seed 3 --config " + ws.arg(ws.root / "gen.json") +
                         " --out " + ws.arg(ds));
    REQUIRE(r.code == 0);
    r = ws.run("simulate --dataset " + ws.arg(ds) + " --out " + ws.arg(truth));
    REQUIRE(r.code == 0);
    r = ws.run("train --seed 5 --dataset " + ws.arg(ds) + " --truth " + ws.arg(truth) +
               " --out " + ws.arg(run_dir) +
               " --epochs 1 --steps 4 --state-dim 8 --iterations 2");
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(run_dir / "checkpoint.json"));
  }
};

SharedPipeline& pipe() {
  static SharedPipeline p;
  return p;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  Workspace& ws = pipe().ws;
  CHECK(ws.run("").code == 2);
  CHECK(ws.run("frobnicate").code == 2);

  const RunResult no_seed =
      ws.run("generate --config " + ws.arg(ws.root / "gen.json") + " --out " +
             ws.arg(ws.root / "ds_x"));
  CHECK(no_seed.code == 2);
  CHECK(no_seed.err.find("--seed") != std::string::npos);

  const RunResult no_config = ws.run("generate --seed 1 --out " + ws.arg(ws.root / "ds_x"));
  CHECK(no_config.code == 2);

  const RunResult train_no_seed =
      ws.run("train --dataset d --truth t --out o");
  CHECK(train_no_seed.code == 2);
  CHECK(train_no_seed.err.find("--seed") != std::string::npos);

  const RunResult bad_sweep =
      ws.run("bench --checkpoint c --scenario s --out o --sweep nodes=1,2");
  CHECK(bad_sweep.code == 2);
  CHECK(bad_sweep.err.find("packets=") != std::string::npos);

  const RunResult bad_split =
      ws.run("generate --seed 1 --config " + ws.arg(ws.root / "gen.json") + " --out " +
             ws.arg(ws.root / "ds_x") + " --split 0.5,0.5");
  CHECK(bad_split.code == 2);
}

TEST_CASE("--version and --help exit cleanly") {
  Workspace& ws = pipe().ws;
  const RunResult version = ws.run("--version");
  CHECK(version.code == 0);
  CHECK(version.out.find("0.1.0") != std::string::npos);
  const RunResult help = ws.run("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("generate") != std::string::npos);
  CHECK(help.out.find("bench") != std::string::npos);
}

TEST_CASE("pipeline artifacts and run manifests") {
  SharedPipeline& p = pipe();
  CHECK(fs::exists(p.ds / "manifest.json"));
  CHECK(fs::exists(p.ds / "scenario_0005.json"));
  CHECK(fs::exists(p.truth / "truth_0005.json"));
  CHECK(fs::exists(p.run_dir / "history.json"));

  const json gen_manifest = json::parse(slurp(p.ds / "run_manifest.json"));
  CHECK(gen_manifest.at("format") == "flow-run-manifest");
  CHECK(gen_manifest.at("subcommand") == "generate");
  CHECK(gen_manifest.at("seed") == 3);
  CHECK(gen_manifest.at("tool_version") == "0.1.0");
  CHECK(gen_manifest.at("wall_time_s").get<double>() >= 0.0);

  const json sim_manifest = json::parse(slurp(p.truth / "run_manifest.json"));
  CHECK(sim_manifest.at("subcommand") == "simulate");
  CHECK(sim_manifest.at("seed").is_null());

  const json train_manifest = json::parse(slurp(p.run_dir / "run_manifest.json"));
  CHECK(train_manifest.at("subcommand") == "train");
  CHECK(train_manifest.at("seed") == 5);
  CHECK(train_manifest.at("config").at("best_epoch").is_number_integer());
}

TEST_CASE("the seed flag overrides the config seed and is logged") {
  SharedPipeline& p = pipe();
  const fs::path other = p.ws.root / "ds_seed42";
  const RunResult r = p.ws.run("generate --seed 42 --config " +
                               p.ws.arg(p.ws.root / "gen.json") + " --out " + p.ws.arg(other));
  REQUIRE(r.code == 0);
  CHECK(json::parse(slurp(other / "run_manifest.json")).at("seed") == 42);
  CHECK(json::parse(slurp(other / "manifest.json")).at("config").at("seed") == 42);
  CHECK(slurp(other / "scenario_0000.json") != slurp(p.ds / "scenario_0000.json"));
}

TEST_CASE("generate and simulate are idempotent given the seed") {
  SharedPipeline& p = pipe();
  const fs::path ds2 = p.ws.root / "ds_again";
  const fs::path truth2 = p.ws.root / "truth_again";
  REQUIRE(p.ws.run("generate --seed 3 --config " + p.ws.arg(p.ws.root / "gen.json") +
                   " --out " + p.ws.arg(ds2))
              .code == 0);
  REQUIRE(p.ws.run("simulate --dataset " + p.ws.arg(ds2) + " --out " + p.ws.arg(truth2)).code ==
          0);
  CHECK(slurp(ds2 / "manifest.json") == slurp(p.ds / "manifest.json"));
  for (int i = 0; i < 6; ++i) {
    char scenario_name[32], truth_name[32];
    std::snprintf(scenario_name, sizeof scenario_name, "scenario_%04d.json", i);
    std::snprintf(truth_name, sizeof truth_name, "truth_%04d.json", i);
    CHECK(slurp(ds2 / scenario_name) == slurp(p.ds / scenario_name));
    CHECK(slurp(truth2 / truth_name) == slurp(p.truth / truth_name));
  }

  // Training twice with one seed reproduces the checkpoint byte for byte.
  const fs::path run2 = p.ws.root / "run_again";
  REQUIRE(p.ws.run("train --seed 5 --dataset " + p.ws.arg(p.ds) + " --truth " +
                   p.ws.arg(p.truth) + " --out " + p.ws.arg(run2) +
                   " --epochs 1 --steps 4 --state-dim 8 --iterations 2 --quiet")
              .code == 0);
  CHECK(slurp(run2 / "checkpoint.json") == slurp(p.run_dir / "checkpoint.json"));
}

TEST_CASE("evaluate prints the metrics table with a finite overall MAPE") {
  SharedPipeline& p = pipe();
  const fs::path eval_dir = p.ws.root / "eval";
  const RunResult r = p.ws.run("evaluate --checkpoint " + p.ws.arg(p.run_dir / "checkpoint.json") +
                               " --dataset " + p.ws.arg(p.ds) + " --truth " + p.ws.arg(p.truth) +
                               " --out " + p.ws.arg(eval_dir) + " --split all");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("delay.avg") != std::string::npos);
  CHECK(r.out.find("overall") != std::string::npos);
  CHECK(fs::exists(eval_dir / "eval_report.json"));
  CHECK(fs::exists(eval_dir / "residuals.csv"));

  const json report = json::parse(slurp(eval_dir / "eval_report.json"));
  const double overall = report.at("overall").at("mape_pct").get<double>();
  CHECK(overall == overall);  // finite, not NaN
  CHECK(overall > 0.0);
  CHECK(json::parse(slurp(eval_dir / "run_manifest.json")).at("subcommand") == "evaluate");
}

TEST_CASE("predict writes a predictions file and its manifest") {
  SharedPipeline& p = pipe();
  const fs::path out = p.ws.root / "pred.json";
  const RunResult r = p.ws.run("predict --checkpoint " + p.ws.arg(p.run_dir / "checkpoint.json") +
                               " --scenario " + p.ws.arg(p.ds / "scenario_0000.json") +
                               " --out " + p.ws.arg(out));
  REQUIRE(r.code == 0);
  CHECK(json::parse(slurp(out)).is_object());
  CHECK(json::parse(slurp(p.ws.root / "pred.json.manifest.json")).at("subcommand") == "predict");
}

TEST_CASE("predict with the wrong window size fails loudly") {
  SharedPipeline& p = pipe();
  json scenario = json::parse(slurp(p.ds / "scenario_0000.json"));
  scenario["window_s"] = 0.25;
  const fs::path wrong = p.ws.root / "scenario_wrong_dt.json";
  spit(wrong, scenario.dump());
  const RunResult r = p.ws.run("predict --checkpoint " + p.ws.arg(p.run_dir / "checkpoint.json") +
                               " --scenario " + p.ws.arg(wrong) + " --out " +
                               p.ws.arg(p.ws.root / "pred_err.json"));
  CHECK(r.code == 1);
  CHECK(r.err.find("window size mismatch") != std::string::npos);
}

TEST_CASE("a corrupt scenario file fails simulate and is named on stderr") {
  SharedPipeline& p = pipe();
  const fs::path broken = p.ws.root / "ds_broken";
  fs::copy(p.ds, broken, fs::copy_options::recursive);
  spit(broken / "scenario_0002.json", "{ this is not json");
  const RunResult r =
      p.ws.run("simulate --dataset " + p.ws.arg(broken) + " --out " +
               p.ws.arg(p.ws.root / "truth_broken"));
  CHECK(r.code == 1);
  CHECK(r.err.find("scenario_0002.json") != std::string::npos);
}

TEST_CASE("bench prints one row per sweep entry") {
  SharedPipeline& p = pipe();
  const fs::path bench_dir = p.ws.root / "bench";
  const RunResult r = p.ws.run("bench --checkpoint " + p.ws.arg(p.run_dir / "checkpoint.json") +
                               " --scenario " + p.ws.arg(p.ds / "scenario_0000.json") +
                               " --out " + p.ws.arg(bench_dir) +
                               " --reps 3 --sweep packets=1x,10x,100x");
  REQUIRE(r.code == 0);
  int rows = 0;
  for (const char* label : {"1x", "10x", "100x"})
    if (r.out.find(label) != std::string::npos) ++rows;
  CHECK(rows == 3);
  const json bench = json::parse(slurp(bench_dir / "bench.json"));
  CHECK(bench.at("rows").size() == 3);
}

TEST_CASE("runtime failures exit with code 1") {
  SharedPipeline& p = pipe();
  const RunResult r = p.ws.run("predict --checkpoint " + p.ws.arg(p.ws.root / "no_ckpt.json") +
                               " --scenario " + p.ws.arg(p.ds / "scenario_0000.json") +
                               " --out " + p.ws.arg(p.ws.root / "pred_err2.json"));
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}
