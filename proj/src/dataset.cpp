// SPDX-License-Identifier: Apache-2.0
#include "flowcast/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <utility>

#include "flowcast/error.hpp"
#include "flowcast/io_util.hpp"
#include "flowcast/rng.hpp"

namespace flowcast {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(TopologyFamily f) {
  switch (f) {
    case TopologyFamily::Line: return "line";
    case TopologyFamily::Star: return "star";
    case TopologyFamily::Tree: return "tree";
    case TopologyFamily::ErdosRenyi: return "erdos_renyi";
  }
  return "?";
}

const char* to_string(ProfileFamily f) {
  switch (f) {
    case ProfileFamily::TrexS: return "trex_s";
    case ProfileFamily::TrexMB: return "trex_mb";
    case ProfileFamily::Trace: return "trace";
  }
  return "?";
}

TopologyFamily topology_family_from_string(const std::string& s) {
  if (s == "line") return TopologyFamily::Line;
  if (s == "star") return TopologyFamily::Star;
  if (s == "tree") return TopologyFamily::Tree;
  if (s == "erdos_renyi") return TopologyFamily::ErdosRenyi;
  throw ParseError("unknown topology_family \"" + s + "\" (expected line, star, tree, or erdos_renyi)");
}

ProfileFamily profile_family_from_string(const std::string& s) {
  if (s == "trex_s") return ProfileFamily::TrexS;
  if (s == "trex_mb") return ProfileFamily::TrexMB;
  if (s == "trace") return ProfileFamily::Trace;
  throw ParseError("unknown profile_family \"" + s + "\" (expected trex_s, trex_mb, or trace)");
}

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw ConfigError(what); }

std::string range_str(int lo, int hi) {
  return "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
}

}  // namespace

void validate_gen_config(const GenConfig& cfg) {
  if (cfg.n_scenarios < 1) bad_config("n_scenarios must be >= 1");
  if (cfg.node_range[0] > cfg.node_range[1])
    bad_config("node_range " + range_str(cfg.node_range[0], cfg.node_range[1]) + " is inverted");
  if (cfg.node_range[0] < 3 || cfg.node_range[1] > 128)
    bad_config("node_range " + range_str(cfg.node_range[0], cfg.node_range[1]) +
               " must lie within [3, 128]");
  if (cfg.path_router_range[0] > cfg.path_router_range[1])
    bad_config("path_router_range " +
               range_str(cfg.path_router_range[0], cfg.path_router_range[1]) + " is inverted");
  if (cfg.path_router_range[0] < 1 || cfg.path_router_range[1] > cfg.node_range[1])
    bad_config("path_router_range " +
               range_str(cfg.path_router_range[0], cfg.path_router_range[1]) +
               " must lie within [1, " + std::to_string(cfg.node_range[1]) + "] (node_range max)");
  if (cfg.flows_per_scenario[0] < 1 || cfg.flows_per_scenario[0] > cfg.flows_per_scenario[1])
    bad_config("flows_per_scenario " +
               range_str(cfg.flows_per_scenario[0], cfg.flows_per_scenario[1]) +
               " must satisfy 1 <= min <= max");
  if (cfg.topology_family == TopologyFamily::ErdosRenyi &&
      (cfg.erdos_renyi_p <= 0.0 || cfg.erdos_renyi_p > 1.0))
    bad_config("erdos_renyi_p must lie in (0, 1]");
  if (cfg.topology_pool < 0) bad_config("topology_pool must be >= 0");
  if (cfg.bandwidth <= 0.0) bad_config("bandwidth must be > 0");
  if (cfg.duration_s <= 0.0) bad_config("duration_s must be > 0");
  if (cfg.window_s <= 0.0) bad_config("window_s must be > 0");
  const double w = cfg.duration_s / cfg.window_s;
  if (std::abs(w - std::llround(w)) > 1e-9 * std::max(1.0, w))
    bad_config("duration_s must be an integer multiple of window_s");
  if (!(cfg.load_range[0] > 0.0) || cfg.load_range[0] > cfg.load_range[1])
    bad_config("load_range must satisfy 0 < min <= max");
  if (cfg.buffer_size < 1) bad_config("buffer_size must be >= 1");
  if (cfg.prop_delay_range[0] < 0.0 || cfg.prop_delay_range[0] > cfg.prop_delay_range[1])
    bad_config("prop_delay_range must satisfy 0 <= min <= max");
  if (cfg.access_bandwidth_factor <= 0.0) bad_config("access_bandwidth_factor must be > 0");
  if (!(cfg.packet_size_range[0] >= 8.0) || cfg.packet_size_range[0] > cfg.packet_size_range[1])
    bad_config("packet_size_range must satisfy 8 <= min <= max (bits)");
}

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

namespace {

const char* const kGenConfigKeys[] = {
    "seed",          "n_scenarios",       "node_range",
    "topology_family", "erdos_renyi_p",   "topology_pool",
    "path_router_range", "flows_per_scenario", "profile_family",
    "bandwidth",     "duration_s",        "window_s",
    "load_range",    "buffer_size",       "prop_delay_range",
    "access_bandwidth_factor", "packet_size_range",
};

double as_number(const json& v, const char* field) {
  if (!v.is_number()) throw ParseError(std::string("generator config: field \"") + field +
                                       "\" must be a number");
  return v.get<double>();
}

int as_int(const json& v, const char* field) {
  if (!v.is_number_integer()) throw ParseError(std::string("generator config: field \"") + field +
                                               "\" must be an integer");
  return v.get<int>();
}

std::array<int, 2> as_int_pair(const json& v, const char* field) {
  if (!v.is_array() || v.size() != 2)
    throw ParseError(std::string("generator config: field \"") + field +
                     "\" must be a [min, max] array");
  return {as_int(v[0], field), as_int(v[1], field)};
}

std::array<double, 2> as_num_pair(const json& v, const char* field) {
  if (!v.is_array() || v.size() != 2)
    throw ParseError(std::string("generator config: field \"") + field +
                     "\" must be a [min, max] array");
  return {as_number(v[0], field), as_number(v[1], field)};
}

std::string as_string(const json& v, const char* field) {
  if (!v.is_string()) throw ParseError(std::string("generator config: field \"") + field +
                                       "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

GenConfig gen_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("generator config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("generator config: top level must be an object");

  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* k : kGenConfigKeys) known = known || key == k;
    if (!known) throw ParseError("generator config: unknown key \"" + key + "\"");
  }

  GenConfig cfg;
  auto has = [&](const char* k) { return j.contains(k); };
  if (has("seed")) {
    if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned())
      throw ParseError("generator config: field \"seed\" must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (!has("n_scenarios")) throw ParseError("generator config: missing field \"n_scenarios\"");
  cfg.n_scenarios = as_int(j["n_scenarios"], "n_scenarios");
  if (has("node_range")) cfg.node_range = as_int_pair(j["node_range"], "node_range");
  if (has("topology_family"))
    cfg.topology_family = topology_family_from_string(as_string(j["topology_family"], "topology_family"));
  if (has("erdos_renyi_p")) cfg.erdos_renyi_p = as_number(j["erdos_renyi_p"], "erdos_renyi_p");
  if (has("topology_pool")) cfg.topology_pool = as_int(j["topology_pool"], "topology_pool");
  if (has("path_router_range"))
    cfg.path_router_range = as_int_pair(j["path_router_range"], "path_router_range");
  if (has("flows_per_scenario"))
    cfg.flows_per_scenario = as_int_pair(j["flows_per_scenario"], "flows_per_scenario");
  if (has("profile_family"))
    cfg.profile_family = profile_family_from_string(as_string(j["profile_family"], "profile_family"));
  if (has("bandwidth")) cfg.bandwidth = as_number(j["bandwidth"], "bandwidth");
  if (has("duration_s")) cfg.duration_s = as_number(j["duration_s"], "duration_s");
  if (has("window_s")) cfg.window_s = as_number(j["window_s"], "window_s");
  if (has("load_range")) cfg.load_range = as_num_pair(j["load_range"], "load_range");
  if (has("buffer_size")) cfg.buffer_size = as_int(j["buffer_size"], "buffer_size");
  if (has("prop_delay_range"))
    cfg.prop_delay_range = as_num_pair(j["prop_delay_range"], "prop_delay_range");
  if (has("access_bandwidth_factor"))
    cfg.access_bandwidth_factor = as_number(j["access_bandwidth_factor"], "access_bandwidth_factor");
  if (has("packet_size_range"))
    cfg.packet_size_range = as_num_pair(j["packet_size_range"], "packet_size_range");

  validate_gen_config(cfg);
  return cfg;
}

std::string gen_config_to_json_text(const GenConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["n_scenarios"] = cfg.n_scenarios;
  j["node_range"] = cfg.node_range;
  j["topology_family"] = to_string(cfg.topology_family);
  j["erdos_renyi_p"] = cfg.erdos_renyi_p;
  j["topology_pool"] = cfg.topology_pool;
  j["path_router_range"] = cfg.path_router_range;
  j["flows_per_scenario"] = cfg.flows_per_scenario;
  j["profile_family"] = to_string(cfg.profile_family);
  j["bandwidth"] = cfg.bandwidth;
  j["duration_s"] = cfg.duration_s;
  j["window_s"] = cfg.window_s;
  j["load_range"] = cfg.load_range;
  j["buffer_size"] = cfg.buffer_size;
  j["prop_delay_range"] = cfg.prop_delay_range;
  j["access_bandwidth_factor"] = cfg.access_bandwidth_factor;
  j["packet_size_range"] = cfg.packet_size_range;
  return j.dump(2) + "\n";
}

GenConfig load_gen_config(const std::string& path) {
  try {
    return gen_config_from_json_text(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Topology sampling
// ---------------------------------------------------------------------------

namespace {

struct RouterGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, a < b, sorted
  std::vector<std::vector<int>> adj;
};

bool is_connected(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
  }
  return reached == n;
}

RouterGraph sample_topology(const GenConfig& cfg, std::mt19937_64& rng, int scenario_index) {
  RouterGraph g;
  g.n = static_cast<int>(uniform_int(rng, cfg.node_range[0], cfg.node_range[1]));
  switch (cfg.topology_family) {
    case TopologyFamily::Line:
      for (int i = 0; i + 1 < g.n; ++i) g.edges.emplace_back(i, i + 1);
      break;
    case TopologyFamily::Star:
      for (int i = 1; i < g.n; ++i) g.edges.emplace_back(0, i);
      break;
    case TopologyFamily::Tree:
      // Random recursive tree: node i attaches to a uniform earlier node.
      for (int i = 1; i < g.n; ++i)
        g.edges.emplace_back(static_cast<int>(uniform_int(rng, 0, i - 1)), i);
      break;
    case TopologyFamily::ErdosRenyi: {
      constexpr int kAttempts = 500;
      bool ok = false;
      for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
        g.edges.clear();
        for (int a = 0; a < g.n; ++a)
          for (int b = a + 1; b < g.n; ++b)
            if (u01(rng) < cfg.erdos_renyi_p) g.edges.emplace_back(a, b);
        ok = !g.edges.empty() && is_connected(g.n, g.edges);
      }
      if (!ok)
        bad_config("scenario " + std::to_string(scenario_index) +
                   ": no connected graph on " + std::to_string(g.n) +
                   " routers after 500 erdos_renyi draws with p = " +
                   std::to_string(cfg.erdos_renyi_p) + "; increase erdos_renyi_p");
      break;
    }
  }
  for (auto& [a, b] : g.edges)
    if (a > b) std::swap(a, b);
  std::sort(g.edges.begin(), g.edges.end());
  g.adj.assign(g.n, {});
  for (auto [a, b] : g.edges) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  return g;
}

// Self-avoiding random walk visiting exactly `routers` routers.
bool try_router_path(const RouterGraph& g, std::mt19937_64& rng, int routers,
                     std::vector<int>& out) {
  out.clear();
  std::vector<char> visited(g.n, 0);
  int cur = static_cast<int>(uniform_int(rng, 0, g.n - 1));
  out.push_back(cur);
  visited[cur] = 1;
  std::vector<int> options;
  while (static_cast<int>(out.size()) < routers) {
    options.clear();
    for (int w : g.adj[cur])
      if (!visited[w]) options.push_back(w);
    if (options.empty()) return false;
    cur = options[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(options.size()) - 1))];
    out.push_back(cur);
    visited[cur] = 1;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Traffic profiles
// ---------------------------------------------------------------------------

// One burst train averaging `target_rate` bits/s: the burst admits an exact
// whole number of packets, so the offered load tracks the target despite
// packet quantization. The 1-1e-9 shave keeps the last packet of a burst
// strictly inside the burst interval under floating-point division.
ConstantBurst make_burst_component(std::mt19937_64& rng, double target_rate, double packet_bits,
                                   double burst_lo, double burst_hi, double duty_lo,
                                   double duty_hi, double duration_s) {
  ConstantBurst b;
  b.burst_duration = uniform_real(rng, burst_lo, burst_hi);
  const double duty = uniform_real(rng, duty_lo, duty_hi);
  b.period = b.burst_duration / duty;
  auto packets = std::llround(target_rate * b.period / packet_bits);
  if (packets < 1) {
    // Below one packet per period: stretch the period so a single packet per
    // burst still averages to the target instead of overshooting it.
    packets = 1;
    b.period = packet_bits / target_rate;
    b.burst_duration = std::min(b.burst_duration, b.period);
  }
  b.rate = static_cast<double>(packets) * packet_bits / b.burst_duration * (1.0 - 1e-9);
  b.start = uniform_real(rng, 0.0, std::min(b.period, 0.5 * duration_s));
  b.stop = duration_s;
  return b;
}

TrafficProfile make_profile(const GenConfig& cfg, std::mt19937_64& rng, double target_rate,
                            double packet_bits) {
  switch (cfg.profile_family) {
    case ProfileFamily::TrexS:
      // Regular high-frequency bursts, each under 1 ms.
      return make_burst_component(rng, target_rate, packet_bits, 0.2e-3, 0.9e-3, 0.08, 0.4,
                                  cfg.duration_s);
    case ProfileFamily::TrexMB: {
      MultiBurst mb;
      const int n = static_cast<int>(uniform_int(rng, 2, 5));
      std::vector<double> weight(n);
      double total = 0.0;
      for (double& w : weight) total += (w = 0.2 + u01(rng));
      for (int i = 0; i < n; ++i) {
        const double period = log_uniform(rng, 2e-3, 20e-3);
        const double duty = uniform_real(rng, 0.1, 0.5);
        const double burst = duty * period;
        mb.components.push_back(make_burst_component(rng, target_rate * weight[i] / total,
                                                     packet_bits, burst, burst, duty, duty,
                                                     cfg.duration_s));
      }
      return mb;
    }
    case ProfileFamily::Trace: {
      // Poisson arrivals at target_rate / packet_bits packets per second.
      TraceReplay tr;
      const double lambda = target_rate / packet_bits;
      double t = exponential(rng, lambda);
      while (t < cfg.duration_s) {
        tr.timestamps.push_back(t);
        t += exponential(rng, lambda);
      }
      return tr;
    }
  }
  throw ConfigError("unknown profile family");
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario assembly
// ---------------------------------------------------------------------------

Scenario generate_scenario(const GenConfig& cfg, int index) {
  validate_gen_config(cfg);
  if (index < 0 || index >= cfg.n_scenarios)
    bad_config("scenario index " + std::to_string(index) + " outside 0.." +
               std::to_string(cfg.n_scenarios - 1));

  // Separate streams so a fixed topology pool can be reused across scenarios
  // while flows and traffic stay scenario-specific.
  const std::uint64_t topo_stream =
      cfg.topology_pool > 0 ? 0x10000000ULL + static_cast<std::uint64_t>(index % cfg.topology_pool)
                            : 0x20000000ULL + static_cast<std::uint64_t>(index);
  std::mt19937_64 topo_rng = make_rng(cfg.seed, topo_stream);
  std::mt19937_64 rng = make_rng(cfg.seed, 0x30000000ULL + static_cast<std::uint64_t>(index));

  const RouterGraph g = sample_topology(cfg, topo_rng, index);

  if (cfg.path_router_range[0] > g.n)
    bad_config("scenario " + std::to_string(index) + ": path_router_range min " +
               std::to_string(cfg.path_router_range[0]) + " exceeds the topology's " +
               std::to_string(g.n) + " routers");

  Scenario s;
  s.duration_s = cfg.duration_s;
  s.window_s = cfg.window_s;
  for (int i = 0; i < g.n; ++i) s.devices.push_back({i, DeviceKind::Router});

  // Both directions of every cable share one propagation delay; links and the
  // queues feeding them are created together and share ids.
  std::map<std::pair<int, int>, int> link_of;  // (src,dst) -> link id
  auto add_cable = [&](int a, int b, double bandwidth, std::mt19937_64& prop_rng) {
    const double prop = uniform_real(prop_rng, cfg.prop_delay_range[0], cfg.prop_delay_range[1]);
    for (auto [src, dst] : {std::pair{a, b}, std::pair{b, a}}) {
      const int id = static_cast<int>(s.links.size());
      s.links.push_back({id, src, dst, bandwidth, prop});
      s.queues.push_back({id, src, id, cfg.buffer_size});
      link_of[{src, dst}] = id;
    }
  };
  for (auto [a, b] : g.edges) add_cable(a, b, cfg.bandwidth, topo_rng);

  // Route flows and attach one endpoint pair per flow through access cables.
  const int n_flows =
      static_cast<int>(uniform_int(rng, cfg.flows_per_scenario[0], cfg.flows_per_scenario[1]));
  const int max_routers = std::min(cfg.path_router_range[1], g.n);
  constexpr int kPathAttempts = 400;

  std::vector<std::vector<int>> flow_routers(static_cast<std::size_t>(n_flows));
  std::vector<double> flow_weight(static_cast<std::size_t>(n_flows));
  std::vector<double> flow_packet_bits(static_cast<std::size_t>(n_flows));

  for (int f = 0; f < n_flows; ++f) {
    bool routed = false;
    for (int attempt = 0; attempt < kPathAttempts && !routed; ++attempt) {
      const int want = static_cast<int>(uniform_int(rng, cfg.path_router_range[0], max_routers));
      routed = try_router_path(g, rng, want, flow_routers[static_cast<std::size_t>(f)]);
    }
    if (!routed)
      bad_config("scenario " + std::to_string(index) + ": no self-avoiding path visiting " +
                 range_str(cfg.path_router_range[0], max_routers) + " routers found in " +
                 std::to_string(kPathAttempts) + " attempts on this " + std::to_string(g.n) +
                 "-router " + to_string(cfg.topology_family) + " topology");
    flow_weight[static_cast<std::size_t>(f)] = log_uniform(rng, 1.0, 8.0);
    flow_packet_bits[static_cast<std::size_t>(f)] =
        8.0 * static_cast<double>(uniform_int(rng, std::llround(cfg.packet_size_range[0] / 8.0),
                                              std::llround(cfg.packet_size_range[1] / 8.0)));
  }

  // Endpoints, access cables, and hop sequences.
  std::vector<Flow> flows(static_cast<std::size_t>(n_flows));
  for (int f = 0; f < n_flows; ++f) {
    const std::vector<int>& routers = flow_routers[static_cast<std::size_t>(f)];
    const int src_ep = static_cast<int>(s.devices.size());
    s.devices.push_back({src_ep, DeviceKind::Endpoint});
    const int dst_ep = static_cast<int>(s.devices.size());
    s.devices.push_back({dst_ep, DeviceKind::Endpoint});
    add_cable(src_ep, routers.front(), cfg.access_bandwidth_factor * cfg.bandwidth, rng);
    add_cable(routers.back(), dst_ep, cfg.access_bandwidth_factor * cfg.bandwidth, rng);

    Flow& fl = flows[static_cast<std::size_t>(f)];
    fl.id = f;
    fl.src_device = src_ep;
    fl.dst_device = dst_ep;
    fl.packet_size = flow_packet_bits[static_cast<std::size_t>(f)];
    auto hop = [&](int a, int b) {
      const int link = link_of.at({a, b});
      fl.path.push_back({link, link});
    };
    hop(src_ep, routers.front());
    for (std::size_t i = 0; i + 1 < routers.size(); ++i) hop(routers[i], routers[i + 1]);
    hop(routers.back(), dst_ep);
  }

  // Load targeting: scale all flow rates so the busiest link's mean
  // utilization lands on a draw from load_range.
  const double target_util = uniform_real(rng, cfg.load_range[0], cfg.load_range[1]);
  std::vector<double> link_weight(s.links.size(), 0.0);
  for (int f = 0; f < n_flows; ++f)
    for (const Hop& h : flows[static_cast<std::size_t>(f)].path)
      link_weight[static_cast<std::size_t>(h.link)] += flow_weight[static_cast<std::size_t>(f)];
  double peak = 0.0;
  for (std::size_t l = 0; l < s.links.size(); ++l)
    peak = std::max(peak, link_weight[l] / s.links[l].bandwidth);
  const double rate_scale = target_util / peak;

  for (int f = 0; f < n_flows; ++f) {
    Flow& fl = flows[static_cast<std::size_t>(f)];
    fl.profile = make_profile(cfg, rng, rate_scale * flow_weight[static_cast<std::size_t>(f)],
                              fl.packet_size);
    s.flows.push_back(std::move(fl));
  }

  validate(s);
  return s;
}

std::vector<Scenario> generate_dataset(const GenConfig& cfg) {
  validate_gen_config(cfg);
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(cfg.n_scenarios));
  for (int i = 0; i < cfg.n_scenarios; ++i) out.push_back(generate_scenario(cfg, i));
  return out;
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

SplitIndices split_indices(int n, const std::array<double, 3>& ratios, std::uint64_t seed) {
  if (n <= 0) bad_config("cannot split an empty dataset");
  double sum = 0.0;
  for (double r : ratios) {
    if (r < 0.0) bad_config("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) bad_config("split ratios must sum to 1");

  // Largest-remainder rounding; ties go to the earlier part (train, val, test).
  std::array<int, 3> count{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = static_cast<double>(n) * ratios[static_cast<std::size_t>(k)];
    count[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(exact + 1e-9));
    remainder[static_cast<std::size_t>(k)] = exact - count[static_cast<std::size_t>(k)];
    assigned += count[static_cast<std::size_t>(k)];
  }
  for (int left = n - assigned; left > 0; --left) {
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (remainder[static_cast<std::size_t>(k)] > remainder[static_cast<std::size_t>(best)] + 1e-12)
        best = k;
    ++count[static_cast<std::size_t>(best)];
    remainder[static_cast<std::size_t>(best)] = -1.0;
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng = make_rng(seed, 0x5011D5ULL);
  shuffle_portable(order, rng);

  SplitIndices out;
  auto take = [&](std::vector<int>& dst, int offset, int len) {
    dst.assign(order.begin() + offset, order.begin() + offset + len);
    std::sort(dst.begin(), dst.end());
  };
  take(out.train, 0, count[0]);
  take(out.val, count[0], count[1]);
  take(out.test, count[0] + count[1], count[2]);
  return out;
}

SplitDataset split_dataset(const std::vector<Scenario>& ds, const std::array<double, 3>& ratios,
                           std::uint64_t seed) {
  const SplitIndices idx = split_indices(static_cast<int>(ds.size()), ratios, seed);
  SplitDataset out;
  auto pick = [&](const std::vector<int>& from, std::vector<Scenario>& to) {
    for (int i : from) to.push_back(ds[static_cast<std::size_t>(i)]);
  };
  pick(idx.train, out.train);
  pick(idx.val, out.val);
  pick(idx.test, out.test);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset directory
// ---------------------------------------------------------------------------

std::string scenario_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scenario_%04d.json", index);
  return buf;
}

namespace {

void check_split_covers(const SplitIndices& split, int n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  int total = 0;
  for (const std::vector<int>* part : {&split.train, &split.val, &split.test})
    for (int i : *part) {
      if (i < 0 || i >= n) bad_config("split index " + std::to_string(i) + " out of range");
      if (seen[static_cast<std::size_t>(i)])
        bad_config("split index " + std::to_string(i) + " appears twice");
      seen[static_cast<std::size_t>(i)] = 1;
      ++total;
    }
  if (total != n)
    bad_config("split covers " + std::to_string(total) + " of " + std::to_string(n) + " scenarios");
}

}  // namespace

void write_dataset(const std::string& dir, const std::vector<Scenario>& scenarios,
                   const SplitIndices& split, const GenConfig* cfg) {
  check_split_covers(split, static_cast<int>(scenarios.size()));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + dir + ": " + ec.message());

  ordered_json manifest;
  manifest["format"] = "flow-dataset";
  manifest["version"] = 1;
  manifest["count"] = scenarios.size();
  ordered_json files = ordered_json::array();
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const std::string name = scenario_file_name(static_cast<int>(i));
    save_scenario(scenarios[i], dir + "/" + name);
    files.push_back(name);
  }
  manifest["files"] = std::move(files);
  manifest["split"] = {{"train", split.train}, {"val", split.val}, {"test", split.test}};
  if (cfg != nullptr) manifest["config"] = json::parse(gen_config_to_json_text(*cfg));
  write_text_file_atomic(dir + "/manifest.json", manifest.dump(2) + "\n");
}

LoadedDataset load_dataset(const std::string& dir) {
  const std::string manifest_path = dir + "/manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_text_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw ParseError(manifest_path + ": invalid JSON: " + e.what());
  }
  if (!manifest.is_object() || manifest.value("format", "") != "flow-dataset")
    throw ParseError(manifest_path + ": not a flow-dataset manifest");
  if (!manifest.contains("files") || !manifest["files"].is_array())
    throw ParseError(manifest_path + ": missing \"files\" array");

  LoadedDataset out;
  for (const auto& f : manifest["files"]) {
    if (!f.is_string()) throw ParseError(manifest_path + ": file names must be strings");
    out.files.push_back(f.get<std::string>());
    out.scenarios.push_back(load_scenario(dir + "/" + out.files.back()));
  }

  auto read_part = [&](const char* key, std::vector<int>& dst) {
    if (!manifest.contains("split") || !manifest["split"].is_object() ||
        !manifest["split"].contains(key) || !manifest["split"][key].is_array())
      throw ParseError(manifest_path + ": missing split." + key + " array");
    for (const auto& v : manifest["split"][key]) {
      if (!v.is_number_integer()) throw ParseError(manifest_path + ": split indices must be integers");
      dst.push_back(v.get<int>());
    }
  };
  read_part("train", out.split.train);
  read_part("val", out.split.val);
  read_part("test", out.split.test);
  check_split_covers(out.split, static_cast<int>(out.scenarios.size()));
  return out;
}

}  // namespace flowcast
