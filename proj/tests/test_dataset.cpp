// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <utility>

#include "flowcast/dataset.hpp"
#include "flowcast/error.hpp"
#include "flowcast/features.hpp"
#include "flowcast/scenario.hpp"
#include "flowcast/traffic.hpp"

using namespace flowcast;

namespace {

GenConfig base_cfg() {
  GenConfig cfg;
  cfg.seed = 1;
  cfg.n_scenarios = 3;
  cfg.node_range = {5, 8};
  cfg.topology_family = TopologyFamily::Tree;
  cfg.path_router_range = {2, 3};
  cfg.flows_per_scenario = {3, 6};
  cfg.profile_family = ProfileFamily::TrexMB;
  return cfg;
}

// Routers visited by a flow = hops transmitted by a router device (every hop
// but the first, which leaves the source endpoint).
int routers_visited(const Scenario& s, const Flow& f) {
  int count = 0;
  for (const Hop& h : f.path) {
    const Queue& q = *std::find_if(s.queues.begin(), s.queues.end(),
                                   [&](const Queue& qq) { return qq.id == h.queue; });
    if (s.devices[static_cast<std::size_t>(q.device)].kind == DeviceKind::Router) ++count;
  }
  return count;
}

std::set<std::pair<int, int>> router_edges(const Scenario& s, int n_routers) {
  std::set<std::pair<int, int>> edges;
  for (const Link& l : s.links)
    if (l.src_device < n_routers && l.dst_device < n_routers)
      edges.insert({std::min(l.src_device, l.dst_device), std::max(l.src_device, l.dst_device)});
  return edges;
}

int count_routers(const Scenario& s) {
  int n = 0;
  for (const Device& d : s.devices) n += d.kind == DeviceKind::Router ? 1 : 0;
  return n;
}

bool whole_scenario_connected(const Scenario& s) {
  std::vector<std::vector<int>> adj(s.devices.size());
  for (const Link& l : s.links) {
    adj[static_cast<std::size_t>(l.src_device)].push_back(l.dst_device);
    adj[static_cast<std::size_t>(l.dst_device)].push_back(l.src_device);
  }
  std::vector<char> seen(s.devices.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)])
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
  }
  return reached == s.devices.size();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* tag) {
    path = std::filesystem::temp_directory_path() / tag;
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("line family: seed-deterministic regeneration, exact line shape") {
  GenConfig cfg = base_cfg();
  cfg.topology_family = TopologyFamily::Line;
  cfg.node_range = {5, 5};
  cfg.n_scenarios = 3;

  const auto a = generate_dataset(cfg);
  const auto b = generate_dataset(cfg);
  REQUIRE(a.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(a[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(i)]);
    // Byte-identical serialization, and per-index generation agrees with the
    // batch (the basis for parallel generation).
    CHECK(scenario_to_json_text(a[static_cast<std::size_t>(i)]) ==
          scenario_to_json_text(b[static_cast<std::size_t>(i)]));
    CHECK(generate_scenario(cfg, i) == a[static_cast<std::size_t>(i)]);
  }

  for (const Scenario& s : a) {
    CHECK(count_routers(s) == 5);
    const std::set<std::pair<int, int>> want{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    CHECK(router_edges(s, 5) == want);
  }

  GenConfig other = cfg;
  other.seed = 2;
  CHECK_FALSE(generate_scenario(other, 0) == a[0]);
}

TEST_CASE("star family shape") {
  GenConfig cfg = base_cfg();
  cfg.topology_family = TopologyFamily::Star;
  cfg.node_range = {6, 6};
  const Scenario s = generate_scenario(cfg, 0);
  const std::set<std::pair<int, int>> want{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
  CHECK(router_edges(s, 6) == want);
}

TEST_CASE("every family x profile combination yields valid, connected scenarios") {
  for (TopologyFamily tf : {TopologyFamily::Line, TopologyFamily::Star, TopologyFamily::Tree,
                            TopologyFamily::ErdosRenyi}) {
    for (ProfileFamily pf : {ProfileFamily::TrexS, ProfileFamily::TrexMB, ProfileFamily::Trace}) {
      GenConfig cfg = base_cfg();
      cfg.topology_family = tf;
      cfg.profile_family = pf;
      cfg.erdos_renyi_p = 0.5;
      cfg.seed = 17 + static_cast<std::uint64_t>(pf);
      cfg.n_scenarios = 2;
      for (int i = 0; i < cfg.n_scenarios; ++i) {
        const Scenario s = generate_scenario(cfg, i);
        INFO("family ", to_string(tf), " profile ", to_string(pf), " scenario ", i);
        CHECK_NOTHROW(validate(s));
        CHECK(whole_scenario_connected(s));

        const int n = count_routers(s);
        CHECK(n >= cfg.node_range[0]);
        CHECK(n <= cfg.node_range[1]);
        // Per-flow endpoints: exactly two per flow, each on one access cable.
        CHECK(s.devices.size() == static_cast<std::size_t>(n) + 2 * s.flows.size());

        for (const Flow& f : s.flows) {
          const int r = routers_visited(s, f);
          CHECK(r >= cfg.path_router_range[0]);
          CHECK(r <= cfg.path_router_range[1]);
          // Endpoints only at the path ends: every hop past the first is
          // transmitted by a router.
          for (std::size_t h = 1; h < f.path.size(); ++h) {
            const Queue& q = *std::find_if(s.queues.begin(), s.queues.end(), [&](const Queue& qq) {
              return qq.id == f.path[h].queue;
            });
            CHECK(s.devices[static_cast<std::size_t>(q.device)].kind == DeviceKind::Router);
          }
        }

        // Link properties: router links at cfg.bandwidth, access links 10x.
        for (const Link& l : s.links) {
          const bool router_link = l.src_device < n && l.dst_device < n;
          CHECK(l.bandwidth == (router_link ? cfg.bandwidth
                                            : cfg.access_bandwidth_factor * cfg.bandwidth));
          CHECK(l.propagation_delay >= cfg.prop_delay_range[0]);
          CHECK(l.propagation_delay <= cfg.prop_delay_range[1]);
        }
        for (const Queue& q : s.queues) CHECK(q.buffer_size == cfg.buffer_size);
      }
    }
  }
}

TEST_CASE("path router counts respect the configured band on lines") {
  GenConfig cfg = base_cfg();
  cfg.topology_family = TopologyFamily::Line;
  cfg.node_range = {5, 8};
  cfg.path_router_range = {3, 5};
  cfg.n_scenarios = 6;
  cfg.seed = 5;
  for (const Scenario& s : generate_dataset(cfg))
    for (const Flow& f : s.flows) {
      const int r = routers_visited(s, f);
      CHECK(r >= 3);
      CHECK(r <= 5);
      // Hop count = routers + access hop: first hop leaves the endpoint.
      CHECK(static_cast<int>(f.path.size()) == r + 1);
    }
}

TEST_CASE("profile family presets have the promised shapes") {
  GenConfig cfg = base_cfg();
  cfg.n_scenarios = 2;

  SUBCASE("trex_s: one burst train per flow, bursts under 1 ms") {
    cfg.profile_family = ProfileFamily::TrexS;
    for (const Scenario& s : generate_dataset(cfg))
      for (const Flow& f : s.flows) {
        const auto* cb = std::get_if<ConstantBurst>(&f.profile);
        REQUIRE(cb != nullptr);
        CHECK(cb->burst_duration < 1e-3);
        CHECK(cb->burst_duration > 0.0);
        CHECK(cb->period >= cb->burst_duration);
      }
  }

  SUBCASE("trex_mb: 2-5 burst components per flow") {
    cfg.profile_family = ProfileFamily::TrexMB;
    for (const Scenario& s : generate_dataset(cfg))
      for (const Flow& f : s.flows) {
        const auto* mb = std::get_if<MultiBurst>(&f.profile);
        REQUIRE(mb != nullptr);
        CHECK(mb->components.size() >= 2);
        CHECK(mb->components.size() <= 5);
      }
  }

  SUBCASE("trace: sorted timestamps within [0, duration)") {
    cfg.profile_family = ProfileFamily::Trace;
    for (const Scenario& s : generate_dataset(cfg))
      for (const Flow& f : s.flows) {
        const auto* tr = std::get_if<TraceReplay>(&f.profile);
        REQUIRE(tr != nullptr);
        CHECK(std::is_sorted(tr->timestamps.begin(), tr->timestamps.end()));
        for (double t : tr->timestamps) {
          CHECK(t >= 0.0);
          CHECK(t < s.duration_s);
        }
      }
  }
}

TEST_CASE("offered load lands near the requested utilization band") {
  for (ProfileFamily pf : {ProfileFamily::TrexS, ProfileFamily::TrexMB, ProfileFamily::Trace}) {
    GenConfig cfg = base_cfg();
    cfg.profile_family = pf;
    cfg.n_scenarios = 4;
    cfg.seed = 23;
    for (const Scenario& s : generate_dataset(cfg)) {
      const WindowFeatures wf = compute_window_features(s);
      double max_mean_util = 0.0;
      for (const auto& link_loads : wf.link_expected_load) {
        double mean = 0.0;
        for (double u : link_loads) mean += u;
        mean /= static_cast<double>(link_loads.size());
        max_mean_util = std::max(max_mean_util, mean);
      }
      INFO("profile ", to_string(pf), " peak mean utilization ", max_mean_util);
      // Target band is [0.15, 0.85]; packet quantization, burst phase, and
      // Poisson noise smear the realized value.
      CHECK(max_mean_util > 0.06);
      CHECK(max_mean_util < 1.25);

      std::size_t total_packets = 0;
      for (const Flow& f : s.flows) total_packets += generate_packets(f, s.duration_s).size();
      CHECK(total_packets > 0);
    }
  }
}

TEST_CASE("infeasible requests raise config errors naming the constraint") {
  SUBCASE("path_router_range beyond node_range fails validation up front") {
    GenConfig cfg = base_cfg();
    cfg.topology_family = TopologyFamily::Line;
    cfg.node_range = {5, 5};
    cfg.path_router_range = {10, 10};
    CHECK_THROWS_WITH_AS(generate_dataset(cfg),
                         doctest::Contains("path_router_range"), ConfigError);
  }

  SUBCASE("star topology cannot host 4-router self-avoiding paths") {
    GenConfig cfg = base_cfg();
    cfg.topology_family = TopologyFamily::Star;
    cfg.node_range = {6, 6};
    cfg.path_router_range = {4, 4};
    CHECK_THROWS_WITH_AS(generate_scenario(cfg, 0),
                         doctest::Contains("no self-avoiding path"), ConfigError);
  }

  SUBCASE("hopeless erdos_renyi density") {
    GenConfig cfg = base_cfg();
    cfg.topology_family = TopologyFamily::ErdosRenyi;
    cfg.erdos_renyi_p = 1e-9;
    cfg.node_range = {8, 8};
    CHECK_THROWS_WITH_AS(generate_scenario(cfg, 0),
                         doctest::Contains("no connected graph"), ConfigError);
  }
}

TEST_CASE("gen config validation rejects bad ranges") {
  GenConfig ok = base_cfg();
  CHECK_NOTHROW(validate_gen_config(ok));

  auto broken = [&](auto mutate) {
    GenConfig cfg = base_cfg();
    mutate(cfg);
    CHECK_THROWS_AS(validate_gen_config(cfg), ConfigError);
  };
  broken([](GenConfig& c) { c.n_scenarios = 0; });
  broken([](GenConfig& c) { c.node_range = {2, 5}; });
  broken([](GenConfig& c) { c.node_range = {5, 200}; });
  broken([](GenConfig& c) { c.node_range = {8, 5}; });
  broken([](GenConfig& c) { c.path_router_range = {0, 3}; });
  broken([](GenConfig& c) { c.path_router_range = {3, 2}; });
  broken([](GenConfig& c) { c.flows_per_scenario = {0, 4}; });
  broken([](GenConfig& c) {
    c.topology_family = TopologyFamily::ErdosRenyi;
    c.erdos_renyi_p = 0.0;
  });
  broken([](GenConfig& c) { c.bandwidth = 0.0; });
  broken([](GenConfig& c) { c.duration_s = 1.0; c.window_s = 0.3; });
  broken([](GenConfig& c) { c.load_range = {0.0, 0.5}; });
  broken([](GenConfig& c) { c.buffer_size = 0; });
  broken([](GenConfig& c) { c.prop_delay_range = {-1e-6, 1e-5}; });
  broken([](GenConfig& c) { c.access_bandwidth_factor = 0.0; });
  broken([](GenConfig& c) { c.packet_size_range = {0.0, 8000.0}; });
}

TEST_CASE("gen config JSON: defaults, round-trip, rejection of junk") {
  SUBCASE("minimal config takes defaults") {
    const GenConfig cfg = gen_config_from_json_text("{\"n_scenarios\": 2}");
    CHECK(cfg.n_scenarios == 2);
    CHECK(cfg.seed == 0);
    CHECK(cfg.node_range == std::array<int, 2>{5, 8});
    CHECK(cfg.topology_family == TopologyFamily::Tree);
    CHECK(cfg.profile_family == ProfileFamily::TrexMB);
    CHECK(cfg.bandwidth == 10e6);
    CHECK(cfg.window_s == 0.1);
    CHECK(cfg.topology_pool == 0);
  }

  SUBCASE("round-trip preserves every field") {
    GenConfig cfg = base_cfg();
    cfg.seed = 99;
    cfg.topology_family = TopologyFamily::ErdosRenyi;
    cfg.erdos_renyi_p = 0.35;
    cfg.topology_pool = 11;
    cfg.profile_family = ProfileFamily::Trace;
    cfg.bandwidth = 5e6;
    cfg.duration_s = 2.0;
    cfg.window_s = 0.2;
    cfg.load_range = {0.2, 0.6};
    cfg.buffer_size = 32;
    cfg.prop_delay_range = {2e-6, 3e-5};
    cfg.access_bandwidth_factor = 4.0;
    cfg.packet_size_range = {8000.0, 8000.0};
    const GenConfig back = gen_config_from_json_text(gen_config_to_json_text(cfg));
    CHECK(back.seed == cfg.seed);
    CHECK(back.n_scenarios == cfg.n_scenarios);
    CHECK(back.node_range == cfg.node_range);
    CHECK(back.topology_family == cfg.topology_family);
    CHECK(back.erdos_renyi_p == cfg.erdos_renyi_p);
    CHECK(back.topology_pool == cfg.topology_pool);
    CHECK(back.path_router_range == cfg.path_router_range);
    CHECK(back.flows_per_scenario == cfg.flows_per_scenario);
    CHECK(back.profile_family == cfg.profile_family);
    CHECK(back.bandwidth == cfg.bandwidth);
    CHECK(back.duration_s == cfg.duration_s);
    CHECK(back.window_s == cfg.window_s);
    CHECK(back.load_range == cfg.load_range);
    CHECK(back.buffer_size == cfg.buffer_size);
    CHECK(back.prop_delay_range == cfg.prop_delay_range);
    CHECK(back.access_bandwidth_factor == cfg.access_bandwidth_factor);
    CHECK(back.packet_size_range == cfg.packet_size_range);
  }

  SUBCASE("malformed inputs") {
    CHECK_THROWS_AS((void)gen_config_from_json_text("not json"), ParseError);
    CHECK_THROWS_AS((void)gen_config_from_json_text("[1,2]"), ParseError);
    CHECK_THROWS_AS((void)gen_config_from_json_text("{}"), ParseError);  // n_scenarios missing
    CHECK_THROWS_WITH_AS((void)gen_config_from_json_text("{\"n_scenarios\":1,\"n_scenario\":1}"),
                         doctest::Contains("unknown key"), ParseError);
    CHECK_THROWS_AS(
        (void)gen_config_from_json_text("{\"n_scenarios\":1,\"topology_family\":\"ring\"}"),
        ParseError);
    CHECK_THROWS_AS(
        (void)gen_config_from_json_text("{\"n_scenarios\":1,\"node_range\":[5]}"), ParseError);
    // Well-formed JSON with out-of-contract values surfaces as ConfigError.
    CHECK_THROWS_AS((void)gen_config_from_json_text("{\"n_scenarios\":0}"), ConfigError);
  }
}

TEST_CASE("topology pool reuses shapes while flows differ") {
  GenConfig cfg = base_cfg();
  cfg.topology_pool = 2;
  cfg.n_scenarios = 6;
  cfg.node_range = {5, 8};
  const auto ds = generate_dataset(cfg);
  auto shape = [&](const Scenario& s) {
    return std::make_pair(count_routers(s), router_edges(s, count_routers(s)));
  };
  CHECK(shape(ds[0]) == shape(ds[2]));
  CHECK(shape(ds[0]) == shape(ds[4]));
  CHECK(shape(ds[1]) == shape(ds[3]));
  CHECK(shape(ds[1]) == shape(ds[5]));
  // Same pool entry, different scenario: traffic still varies.
  CHECK_FALSE(ds[0] == ds[2]);
}

TEST_CASE("split_indices: exact sizes, disjoint cover, determinism") {
  SUBCASE("100 at 75/15/10") {
    const SplitIndices sp = split_indices(100, {0.75, 0.15, 0.10}, 7);
    CHECK(sp.train.size() == 75);
    CHECK(sp.val.size() == 15);
    CHECK(sp.test.size() == 10);
    std::set<int> all(sp.train.begin(), sp.train.end());
    all.insert(sp.val.begin(), sp.val.end());
    all.insert(sp.test.begin(), sp.test.end());
    CHECK(all.size() == 100);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 99);
  }

  SUBCASE("degenerate single scenario goes to train") {
    const SplitIndices sp = split_indices(1, {0.75, 0.15, 0.10}, 7);
    CHECK(sp.train == std::vector<int>{0});
    CHECK(sp.val.empty());
    CHECK(sp.test.empty());
  }

  SUBCASE("largest remainder: 10 at 0.3/0.3/0.4") {
    const SplitIndices sp = split_indices(10, {0.3, 0.3, 0.4}, 1);
    CHECK(sp.train.size() == 3);
    CHECK(sp.val.size() == 3);
    CHECK(sp.test.size() == 4);
  }

  SUBCASE("determinism and seed sensitivity") {
    const SplitIndices a = split_indices(50, {0.75, 0.15, 0.10}, 3);
    const SplitIndices b = split_indices(50, {0.75, 0.15, 0.10}, 3);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);
    const SplitIndices c = split_indices(50, {0.75, 0.15, 0.10}, 4);
    CHECK(a.train != c.train);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(split_indices(0, {0.75, 0.15, 0.10}, 1), ConfigError);
    CHECK_THROWS_AS(split_indices(10, {0.75, 0.15, 0.2}, 1), ConfigError);
    CHECK_THROWS_AS(split_indices(10, {1.2, -0.1, -0.1}, 1), ConfigError);
  }
}

TEST_CASE("split_dataset partitions the scenario list") {
  GenConfig cfg = base_cfg();
  cfg.n_scenarios = 8;
  const auto ds = generate_dataset(cfg);
  const SplitDataset sp = split_dataset(ds, {0.75, 0.15, 0.10}, 11);
  CHECK(sp.train.size() + sp.val.size() + sp.test.size() == ds.size());
  const SplitIndices idx = split_indices(8, {0.75, 0.15, 0.10}, 11);
  for (std::size_t i = 0; i < idx.train.size(); ++i)
    CHECK(sp.train[i] == ds[static_cast<std::size_t>(idx.train[i])]);
  for (std::size_t i = 0; i < idx.test.size(); ++i)
    CHECK(sp.test[i] == ds[static_cast<std::size_t>(idx.test[i])]);
}

TEST_CASE("dataset directory round-trip") {
  TempDir dir("flowcast_dataset_rt");
  GenConfig cfg = base_cfg();
  cfg.n_scenarios = 5;
  const auto ds = generate_dataset(cfg);
  const SplitIndices sp = split_indices(5, {0.75, 0.15, 0.10}, cfg.seed);
  write_dataset(dir.str(), ds, sp, &cfg);

  CHECK(std::filesystem::exists(dir.path / "manifest.json"));
  CHECK(std::filesystem::exists(dir.path / "scenario_0000.json"));
  CHECK(std::filesystem::exists(dir.path / "scenario_0004.json"));

  const LoadedDataset back = load_dataset(dir.str());
  REQUIRE(back.scenarios.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.scenarios[i] == ds[i]);
    CHECK(back.files[i] == scenario_file_name(static_cast<int>(i)));
  }
  CHECK(back.split.train == sp.train);
  CHECK(back.split.val == sp.val);
  CHECK(back.split.test == sp.test);
}

TEST_CASE("dataset directory error paths") {
  SUBCASE("missing directory") {
    CHECK_THROWS_AS((void)load_dataset("/nonexistent/flowcast_nowhere"), IoError);
  }

  SUBCASE("corrupt manifest") {
    TempDir dir("flowcast_dataset_badmanifest");
    std::filesystem::create_directories(dir.path);
    std::ofstream(dir.path / "manifest.json") << "{ nope";
    CHECK_THROWS_AS((void)load_dataset(dir.str()), ParseError);
  }

  SUBCASE("wrong format marker") {
    TempDir dir("flowcast_dataset_badformat");
    std::filesystem::create_directories(dir.path);
    std::ofstream(dir.path / "manifest.json") << "{\"format\":\"something-else\"}";
    CHECK_THROWS_WITH_AS((void)load_dataset(dir.str()),
                         doctest::Contains("not a flow-dataset"), ParseError);
  }

  SUBCASE("split must cover the scenarios exactly") {
    GenConfig cfg = base_cfg();
    cfg.n_scenarios = 3;
    const auto ds = generate_dataset(cfg);
    SplitIndices bad;
    bad.train = {0, 1};  // index 2 missing
    TempDir dir("flowcast_dataset_badsplit");
    CHECK_THROWS_WITH_AS(write_dataset(dir.str(), ds, bad, nullptr),
                         doctest::Contains("covers"), ConfigError);
    bad.val = {1};  // duplicate
    bad.test = {2};
    CHECK_THROWS_WITH_AS(write_dataset(dir.str(), ds, bad, nullptr),
                         doctest::Contains("twice"), ConfigError);
  }
}
