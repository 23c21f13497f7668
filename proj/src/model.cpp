// SPDX-License-Identifier: Apache-2.0
#include "flowcast/model.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "flowcast/error.hpp"
#include "flowcast/io_util.hpp"

namespace flowcast {

using nlohmann::json;
using nlohmann::ordered_json;

Model make_model(const ModelConfig& cfg) {
  if (cfg.state_dim < 1) throw ConfigError("model: state_dim must be >= 1");
  if (cfg.mp_iterations < 1) throw ConfigError("model: mp_iterations must be >= 1");
  if (cfg.n_targets < 1) throw ConfigError("model: n_targets must be >= 1");
  Model m;
  m.cfg = cfg;
  const int S = cfg.state_dim;
  // Creation order fixes the parameter layout used by Adam and checkpoints.
  m.E_f = make_mlp(m.store, "E_f", {3, S, S, S}, false);
  m.E_l = make_mlp(m.store, "E_l", {1, S, S, S}, false);
  m.E_q = make_mlp(m.store, "E_q", {3, S, S, S}, false);
  m.U_F = make_gru(m.store, "U_F", 2 * S, S);
  m.U_Q = make_gru(m.store, "U_Q", 2 * S, S);
  m.U_D = make_gru(m.store, "U_D", S, S);
  m.U_L = make_gru(m.store, "U_L", S, S);
  m.R = make_mlp(m.store, "R", {S, S, S, cfg.n_targets}, true);
  m.norm.mean = {0.0, 0.0};
  m.norm.std = {1.0, 1.0};
  return m;
}

void init_model(Model& m, std::uint64_t seed) { init_params(m.store, seed); }

ForwardResult forward_on_tape(const Model& m, Tape& t, const ExpandedGraph& g,
                              const WindowFeatures& f) {
  const int S = m.cfg.state_dim;
  const int T = m.cfg.mp_iterations;
  const int W = f.windows;
  if (W <= 0) throw Error("forward: scenario has no windows");
  if (m.norm.mean.size() < 2 || m.norm.std.size() < 2)
    throw Error("forward: normalizer not initialized");

  ForwardResult r;
  r.y.assign(g.n_flows, std::vector<Tape::Id>(W, -1));
  r.messages.resize(W);
  r.hq_in.resize(W);
  r.hq_out.resize(W);
  r.hd_in.resize(W);
  r.hd_out.resize(W);

  // Static initialization: encode each queue from its device-type one-hot,
  // then give each device one recurrent step over the sum of its queues.
  std::vector<Tape::Id> h_q(g.n_queues), h_d(g.n_devices);
  for (int q = 0; q < g.n_queues; ++q)
    h_q[q] = t.mlp(m.E_q, t.input(std::span<const double>(f.queue_device_type[q].data(), 3)));
  for (int d = 0; d < g.n_devices; ++d) {
    std::vector<Tape::Id> parts;
    for (int q : g.device_queues[d]) parts.push_back(h_q[q]);
    const Tape::Id m0 = parts.empty() ? t.zeros(S) : t.sum(parts);
    h_d[d] = t.gru(m.U_D, m0, t.zeros(S));
  }

  for (int w = 0; w < W; ++w) {
    r.hq_in[w] = h_q;
    r.hd_in[w] = h_d;

    // Flow and link states are re-encoded from this window's features.
    std::vector<Tape::Id> h_f(g.n_flows), h_l(g.n_links);
    for (int fl = 0; fl < g.n_flows; ++fl) {
      const double feats[3] = {m.norm.apply(0, f.flow_avg_load[fl][w]),
                               m.norm.apply(1, f.flow_packet_rate[fl][w]),
                               f.flow_packet_size[fl] / 1000.0};
      h_f[fl] = t.mlp(m.E_f, t.input(feats));
    }
    for (int l = 0; l < g.n_links; ++l) {
      const double feats[1] = {f.link_expected_load[l][w]};
      h_l[l] = t.mlp(m.E_l, t.input(feats));
    }

    std::vector<std::vector<Tape::Id>> msg(g.n_flows);
    for (int fl = 0; fl < g.n_flows; ++fl) msg[fl].assign(g.flow_paths[fl].size(), -1);

    for (int it = 0; it < T; ++it) {
      // (i) Flows: scan each path in hop order; the running hidden state
      // emitted at each hop is that hop's message, and the state left at the
      // path's end seeds the next round's scan.
      for (int fl = 0; fl < g.n_flows; ++fl) {
        Tape::Id h = h_f[fl];
        const auto& path = g.flow_paths[fl];
        for (std::size_t pos = 0; pos < path.size(); ++pos) {
          h = t.gru(m.U_F, t.concat(h_l[path[pos].link], h_q[path[pos].queue]), h);
          msg[fl][pos] = h;
        }
        h_f[fl] = h;
      }
      // (ii) Queues: device context (previous round's state) alongside the
      // sum of crossing-flow messages, in canonical (flow, pos) order.
      std::vector<Tape::Id> hq_new(g.n_queues);
      for (int q = 0; q < g.n_queues; ++q) {
        std::vector<Tape::Id> parts;
        for (const auto& fp : g.queue_flows[q]) parts.push_back(msg[fp.flow][fp.pos]);
        const Tape::Id agg = parts.empty() ? t.zeros(S) : t.sum(parts);
        hq_new[q] = t.gru(m.U_Q, t.concat(h_d[g.queue_device[q]], agg), h_q[q]);
      }
      h_q = std::move(hq_new);
      // (iii) Devices: one step over the sum of their queues' new states.
      for (int d = 0; d < g.n_devices; ++d) {
        std::vector<Tape::Id> parts;
        for (int q : g.device_queues[d]) parts.push_back(h_q[q]);
        const Tape::Id md = parts.empty() ? t.zeros(S) : t.sum(parts);
        h_d[d] = t.gru(m.U_D, md, h_d[d]);
      }
      // (iv) Links: one step over the feeding queue's message (its new state).
      for (int l = 0; l < g.n_links; ++l) h_l[l] = t.gru(m.U_L, h_q[g.link_queue[l]], h_l[l]);
    }

    // Readout: per-hop contributions of the final round, summed along the path.
    for (int fl = 0; fl < g.n_flows; ++fl) {
      std::vector<Tape::Id> parts;
      parts.reserve(msg[fl].size());
      for (Tape::Id mm : msg[fl]) parts.push_back(t.mlp(m.R, mm));
      r.y[fl][w] = t.sum(parts);
    }
    r.messages[w] = std::move(msg);
    r.hq_out[w] = h_q;
    r.hd_out[w] = h_d;
  }
  return r;
}

namespace {

std::string double_str(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

}  // namespace

Prediction predict_scenario(const Model& m, const Scenario& s) {
  if (m.window_s > 0.0 &&
      std::abs(s.window_s - m.window_s) > 1e-12 * std::max(1.0, m.window_s))
    throw ConfigError("window size mismatch: the model was trained at window_s = " +
                      double_str(m.window_s) + " s but the scenario uses window_s = " +
                      double_str(s.window_s) +
                      " s; retrain the model for this time resolution");
  const ExpandedGraph g = build_expanded_graph(s);
  const WindowFeatures f = compute_window_features(s);
  // Inference runs forward only; gradients are never touched.
  Tape t(const_cast<ParamStore*>(&m.store));
  const ForwardResult r = forward_on_tape(m, t, g, f);
  Prediction p;
  p.window_s = s.window_s;
  for (int fl = 0; fl < g.n_flows; ++fl) {
    auto& rows = p.flows[g.flow_ids[fl]];
    rows.assign(f.windows, {});
    for (int w = 0; w < f.windows; ++w) {
      const auto v = t.value(r.y[fl][w]);
      for (int k = 0; k < kNumTargets; ++k) rows[w][k] = v[k] * 1e-6;  // model runs in us
    }
  }
  return p;
}

namespace {

ordered_json stats_to_json(const std::array<double, kNumTargets>& row, int base) {
  ordered_json j = ordered_json::object();
  for (int k = 0; k < 5; ++k) j[kStatNames[k]] = row[base + k];
  return j;
}

void stats_from_json(const json& j, std::array<double, kNumTargets>& row, int base,
                     const std::string& ctx) {
  for (int k = 0; k < 5; ++k) {
    auto it = j.find(kStatNames[k]);
    if (it == j.end() || !it->is_number())
      throw ParseError(ctx + ": missing or non-numeric \"" + kStatNames[k] + "\"");
    row[base + k] = it->get<double>();
  }
}

}  // namespace

std::string prediction_to_json_text(const Prediction& p) {
  ordered_json root = ordered_json::object();
  for (const auto& [fid, rows] : p.flows) {
    ordered_json fobj = ordered_json::object();
    for (std::size_t w = 0; w < rows.size(); ++w) {
      ordered_json cell = ordered_json::object();
      cell["delay"] = stats_to_json(rows[w], 0);
      cell["jitter"] = stats_to_json(rows[w], 5);
      fobj[std::to_string(w)] = std::move(cell);
    }
    root[std::to_string(fid)] = std::move(fobj);
  }
  return root.dump(2) + "\n";
}

Prediction prediction_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("prediction: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("prediction: top level must be an object");
  Prediction p;
  for (const auto& [fkey, fval] : root.items()) {
    int fid = 0;
    try {
      fid = std::stoi(fkey);
    } catch (const std::exception&) {
      throw ParseError("prediction: flow key \"" + fkey + "\" is not an integer");
    }
    if (!fval.is_object())
      throw ParseError("prediction: flow " + fkey + " must map windows to objects");
    int max_w = -1;
    for (const auto& [wkey, wval] : fval.items()) {
      (void)wval;
      try {
        max_w = std::max(max_w, std::stoi(wkey));
      } catch (const std::exception&) {
        throw ParseError("prediction: flow " + fkey + " window key \"" + wkey +
                         "\" is not an integer");
      }
    }
    auto& rows = p.flows[fid];
    rows.assign(max_w + 1, {});
    std::vector<bool> seen(max_w + 1, false);
    for (const auto& [wkey, wval] : fval.items()) {
      const int w = std::stoi(wkey);
      if (w < 0) throw ParseError("prediction: negative window index");
      const std::string ctx = "prediction: flow " + fkey + " window " + wkey;
      auto dit = wval.find("delay");
      auto jit = wval.find("jitter");
      if (dit == wval.end() || jit == wval.end())
        throw ParseError(ctx + ": needs \"delay\" and \"jitter\"");
      stats_from_json(*dit, rows[w], 0, ctx + ".delay");
      stats_from_json(*jit, rows[w], 5, ctx + ".jitter");
      seen[w] = true;
    }
    for (int w = 0; w <= max_w; ++w)
      if (!seen[w])
        throw ParseError("prediction: flow " + fkey + " missing window " + std::to_string(w));
  }
  return p;
}

void save_prediction(const Prediction& p, const std::string& path) {
  write_text_file_atomic(path, prediction_to_json_text(p));
}

Prediction load_prediction(const std::string& path) {
  try {
    return prediction_from_json_text(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

namespace {

ordered_json tensor_to_json(const Tensor& t) {
  ordered_json j = ordered_json::object();
  j["shape"] = t.shape;
  j["data"] = t.data;
  return j;
}

void tensor_from_json(const json& j, Tensor& t, const std::string& ctx) {
  auto sit = j.find("shape");
  auto dit = j.find("data");
  if (sit == j.end() || !sit->is_array() || dit == j.end() || !dit->is_array())
    throw ParseError(ctx + ": tensor needs \"shape\" and \"data\" arrays");
  std::vector<int> shape;
  for (const auto& v : *sit) {
    if (!v.is_number_integer()) throw ParseError(ctx + ": shape must be integers");
    shape.push_back(v.get<int>());
  }
  if (shape != t.shape) throw ParseError(ctx + ": tensor shape mismatch");
  if (dit->size() != t.data.size()) throw ParseError(ctx + ": tensor data length mismatch");
  std::size_t i = 0;
  for (const auto& v : *dit) {
    if (!v.is_number()) throw ParseError(ctx + ": tensor data must be numeric");
    t.data[i++] = v.get<double>();
  }
}

ordered_json mlp_to_json(const Model& m, const MlpParams& p) {
  ordered_json j = ordered_json::object();
  j["kind"] = "mlp";
  j["sizes"] = p.sizes;
  j["softplus_output"] = p.softplus_output;
  ordered_json layers = ordered_json::array();
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    ordered_json layer = ordered_json::object();
    layer["W"] = tensor_to_json(m.store[p.weights[i]].value);
    layer["b"] = tensor_to_json(m.store[p.biases[i]].value);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j;
}

void mlp_from_json(const json& j, Model& m, const MlpParams& p, const std::string& ctx) {
  auto lit = j.find("layers");
  if (lit == j.end() || !lit->is_array() || lit->size() != p.weights.size())
    throw ParseError(ctx + ": expected " + std::to_string(p.weights.size()) + " layers");
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    const json& layer = (*lit)[i];
    auto wit = layer.find("W");
    auto bit = layer.find("b");
    if (wit == layer.end() || bit == layer.end())
      throw ParseError(ctx + ": layer " + std::to_string(i) + " needs \"W\" and \"b\"");
    tensor_from_json(*wit, m.store[p.weights[i]].value,
                     ctx + ".layers[" + std::to_string(i) + "].W");
    tensor_from_json(*bit, m.store[p.biases[i]].value,
                     ctx + ".layers[" + std::to_string(i) + "].b");
  }
}

ordered_json gru_to_json(const Model& m, const GruParams& g) {
  ordered_json j = ordered_json::object();
  j["kind"] = "gru";
  j["input_dim"] = g.input_dim;
  j["hidden_dim"] = g.hidden_dim;
  const std::pair<const char*, int> parts[] = {
      {"W_z", g.W_z}, {"U_z", g.U_z}, {"b_z", g.b_z}, {"W_r", g.W_r}, {"U_r", g.U_r},
      {"b_r", g.b_r}, {"W_h", g.W_h}, {"U_h", g.U_h}, {"b_h", g.b_h}};
  for (const auto& [name, idx] : parts) j[name] = tensor_to_json(m.store[idx].value);
  return j;
}

void gru_from_json(const json& j, Model& m, const GruParams& g, const std::string& ctx) {
  const std::pair<const char*, int> parts[] = {
      {"W_z", g.W_z}, {"U_z", g.U_z}, {"b_z", g.b_z}, {"W_r", g.W_r}, {"U_r", g.U_r},
      {"b_r", g.b_r}, {"W_h", g.W_h}, {"U_h", g.U_h}, {"b_h", g.b_h}};
  for (const auto& [name, idx] : parts) {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(ctx + ": missing \"" + name + "\"");
    tensor_from_json(*it, m.store[idx].value, ctx + "." + name);
  }
}

constexpr const char* kCheckpointFormat = "flow-model-checkpoint";
constexpr int kCheckpointVersion = 1;

}  // namespace

std::string checkpoint_to_json_text(const Model& m) {
  ordered_json root = ordered_json::object();
  root["format"] = kCheckpointFormat;
  root["version"] = kCheckpointVersion;
  ordered_json hp = ordered_json::object();
  hp["state_dim"] = m.cfg.state_dim;
  hp["mp_iterations"] = m.cfg.mp_iterations;
  hp["n_targets"] = m.cfg.n_targets;
  hp["window_s"] = m.window_s;
  root["hyperparams"] = std::move(hp);
  ordered_json norm = ordered_json::object();
  norm["mean"] = m.norm.mean;
  norm["std"] = m.norm.std;
  root["normalizer"] = std::move(norm);
  ordered_json blocks = ordered_json::object();
  blocks["E_f"] = mlp_to_json(m, m.E_f);
  blocks["E_l"] = mlp_to_json(m, m.E_l);
  blocks["E_q"] = mlp_to_json(m, m.E_q);
  blocks["U_F"] = gru_to_json(m, m.U_F);
  blocks["U_Q"] = gru_to_json(m, m.U_Q);
  blocks["U_D"] = gru_to_json(m, m.U_D);
  blocks["U_L"] = gru_to_json(m, m.U_L);
  blocks["R"] = mlp_to_json(m, m.R);
  root["blocks"] = std::move(blocks);
  return root.dump(2) + "\n";
}

Model checkpoint_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("checkpoint: top level must be an object");
  if (root.value("format", std::string()) != kCheckpointFormat)
    throw ParseError("checkpoint: unrecognized format");
  if (root.value("version", -1) != kCheckpointVersion)
    throw ParseError("checkpoint: unsupported version");

  auto hit = root.find("hyperparams");
  if (hit == root.end() || !hit->is_object())
    throw ParseError("checkpoint: missing \"hyperparams\"");
  ModelConfig cfg;
  cfg.state_dim = hit->value("state_dim", 0);
  cfg.mp_iterations = hit->value("mp_iterations", 0);
  cfg.n_targets = hit->value("n_targets", 0);
  if (cfg.state_dim < 1 || cfg.mp_iterations < 1 || cfg.n_targets < 1)
    throw ParseError("checkpoint: invalid hyperparameters");
  Model m = make_model(cfg);
  m.window_s = hit->value("window_s", 0.0);

  auto nit = root.find("normalizer");
  if (nit == root.end() || !nit->is_object())
    throw ParseError("checkpoint: missing \"normalizer\"");
  auto mit = nit->find("mean");
  auto sit = nit->find("std");
  if (mit == nit->end() || !mit->is_array() || sit == nit->end() || !sit->is_array() ||
      mit->size() != 2 || sit->size() != 2)
    throw ParseError("checkpoint: normalizer needs 2-element \"mean\" and \"std\"");
  for (int i = 0; i < 2; ++i) {
    m.norm.mean[i] = (*mit)[i].get<double>();
    m.norm.std[i] = (*sit)[i].get<double>();
    if (m.norm.std[i] <= 0.0) throw ParseError("checkpoint: normalizer std must be > 0");
  }

  auto bit = root.find("blocks");
  if (bit == root.end() || !bit->is_object()) throw ParseError("checkpoint: missing \"blocks\"");
  auto block = [&](const char* name) -> const json& {
    auto it = bit->find(name);
    if (it == bit->end())
      throw ParseError(std::string("checkpoint: missing block \"") + name + "\"");
    return *it;
  };
  mlp_from_json(block("E_f"), m, m.E_f, "checkpoint.E_f");
  mlp_from_json(block("E_l"), m, m.E_l, "checkpoint.E_l");
  mlp_from_json(block("E_q"), m, m.E_q, "checkpoint.E_q");
  gru_from_json(block("U_F"), m, m.U_F, "checkpoint.U_F");
  gru_from_json(block("U_Q"), m, m.U_Q, "checkpoint.U_Q");
  gru_from_json(block("U_D"), m, m.U_D, "checkpoint.U_D");
  gru_from_json(block("U_L"), m, m.U_L, "checkpoint.U_L");
  mlp_from_json(block("R"), m, m.R, "checkpoint.R");
  return m;
}

void save_checkpoint(const Model& m, const std::string& path) {
  write_text_file_atomic(path, checkpoint_to_json_text(m));
}

Model load_checkpoint(const std::string& path) {
  try {
    return checkpoint_from_json_text(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace flowcast
