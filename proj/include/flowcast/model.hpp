// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowcast/expanded_graph.hpp"
#include "flowcast/features.hpp"
#include "flowcast/nn.hpp"
#include "flowcast/scenario.hpp"
#include "flowcast/tape.hpp"

namespace flowcast {

// Per-(flow,window) targets: five delay statistics then five jitter
// statistics, in this order.
inline constexpr int kNumTargets = 10;
inline constexpr std::array<const char*, 5> kStatNames = {"avg", "median", "p90", "p95", "p99"};

struct ModelConfig {
  int state_dim = 32;
  int mp_iterations = 8;  // message-passing rounds per window
  int n_targets = kNumTargets;
};

// The whole network: three encoders, four recurrent update cells, one
// readout head — exactly eight named parameter blocks, shared across every
// element and every window of any scenario.
struct Model {
  ModelConfig cfg;
  ParamStore store;
  MlpParams E_f, E_l, E_q, R;
  GruParams U_F, U_Q, U_D, U_L;
  Normalizer norm;        // z-score stats for [flow avg_load, flow packet_rate]
  double window_s = 0.0;  // window size the model (and normalizer) was fit at
};

Model make_model(const ModelConfig& cfg);
void init_model(Model& m, std::uint64_t seed);

// Everything a training step or a test probe needs from one scenario pass.
// All ids point into the caller's tape; `y` values are in microseconds.
struct ForwardResult {
  std::vector<std::vector<Tape::Id>> y;  // [flow][window] -> n_targets node
  // Final-round per-hop messages and the state trajectory, for oracle tests.
  std::vector<std::vector<std::vector<Tape::Id>>> messages;  // [window][flow][pos]
  std::vector<std::vector<Tape::Id>> hq_in, hq_out;  // [window][queue]
  std::vector<std::vector<Tape::Id>> hd_in, hd_out;  // [window][device]
};

// One tape per scenario; queue/device states carry across windows on the
// tape (the nodes entering window t+1 are the nodes leaving window t), while
// flow and link states are re-encoded from that window's features.
ForwardResult forward_on_tape(const Model& m, Tape& t, const ExpandedGraph& g,
                              const WindowFeatures& f);

// Per original flow id, per window, the ten predicted statistics in seconds.
struct Prediction {
  double window_s = 0.0;
  std::map<int, std::vector<std::array<double, kNumTargets>>> flows;
};

// Runs the model on one scenario (features are computed here). Errors if the
// scenario's window size differs from the one the model was trained at.
Prediction predict_scenario(const Model& m, const Scenario& s);

std::string prediction_to_json_text(const Prediction& p);
Prediction prediction_from_json_text(const std::string& text);
void save_prediction(const Prediction& p, const std::string& path);
Prediction load_prediction(const std::string& path);

std::string checkpoint_to_json_text(const Model& m);
Model checkpoint_from_json_text(const std::string& text);
void save_checkpoint(const Model& m, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace flowcast
