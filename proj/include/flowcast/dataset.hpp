// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "flowcast/scenario.hpp"

namespace flowcast {

enum class TopologyFamily { Line, Star, Tree, ErdosRenyi };
enum class ProfileFamily { TrexS, TrexMB, Trace };

const char* to_string(TopologyFamily f);
const char* to_string(ProfileFamily f);
TopologyFamily topology_family_from_string(const std::string& s);
ProfileFamily profile_family_from_string(const std::string& s);

// Random-scenario generator configuration. Topology nodes are routers;
// each flow additionally gets two endpoint hosts attached through dedicated
// access cables, so the device count exceeds node_range by 2 per flow.
struct GenConfig {
  std::uint64_t seed = 0;
  int n_scenarios = 1;
  std::array<int, 2> node_range{5, 8};  // routers per topology, within [3, 128]
  TopologyFamily topology_family = TopologyFamily::Tree;
  double erdos_renyi_p = 0.5;  // edge probability, ErdosRenyi only
  // When > 0, topologies are drawn from a fixed pool of this size (scenario i
  // reuses pool entry i mod topology_pool), mimicking a testbed with a small
  // set of physical topologies. 0 = fresh topology per scenario.
  int topology_pool = 0;
  std::array<int, 2> path_router_range{2, 4};  // routers visited per flow path
  std::array<int, 2> flows_per_scenario{3, 8};
  ProfileFamily profile_family = ProfileFamily::TrexMB;
  double bandwidth = 10e6;  // bits/s per router-router link
  double duration_s = 1.0;
  double window_s = 0.1;
  std::array<double, 2> load_range{0.15, 0.85};  // target peak link utilization
  int buffer_size = 64;                          // packets per queue
  std::array<double, 2> prop_delay_range{1e-6, 5e-5};  // s, drawn per cable
  double access_bandwidth_factor = 10.0;  // endpoint access links vs router links
  std::array<double, 2> packet_size_range{4000.0, 12000.0};  // bits, per flow
};

// Throws ConfigError naming the violated constraint.
void validate_gen_config(const GenConfig& cfg);

// JSON object with keys named after the struct fields; all but n_scenarios
// are optional and default as above. Unknown keys are rejected. The parsed
// config is validated before being returned.
GenConfig gen_config_from_json_text(const std::string& text);
std::string gen_config_to_json_text(const GenConfig& cfg);
GenConfig load_gen_config(const std::string& path);

// Scenario `index` of the dataset. Deterministic in (cfg.seed, index): every
// scenario has its own RNG stream, so scenarios can be generated in any order
// or in parallel with identical results. Throws ConfigError when the request
// is infeasible (e.g. no connected graph or no path of the requested length).
Scenario generate_scenario(const GenConfig& cfg, int index);

std::vector<Scenario> generate_dataset(const GenConfig& cfg);

// Disjoint partition of 0..n-1: seeded shuffle, then largest-remainder
// rounding of `ratios` (ties favor train, then val). Parts are sorted
// ascending. Ratios must be non-negative and sum to 1 (±1e-9).
struct SplitIndices {
  std::vector<int> train, val, test;
};
SplitIndices split_indices(int n, const std::array<double, 3>& ratios, std::uint64_t seed);

struct SplitDataset {
  std::vector<Scenario> train, val, test;
};
SplitDataset split_dataset(const std::vector<Scenario>& ds, const std::array<double, 3>& ratios,
                           std::uint64_t seed);

// Dataset directory layout: one scenario_%04d.json per scenario plus a
// manifest.json recording the file list, the split, and (when given) the
// resolved generator config.
std::string scenario_file_name(int index);
void write_dataset(const std::string& dir, const std::vector<Scenario>& scenarios,
                   const SplitIndices& split, const GenConfig* cfg = nullptr);

struct LoadedDataset {
  std::vector<Scenario> scenarios;  // in file order (scenario i = files[i])
  SplitIndices split;
  std::vector<std::string> files;  // names relative to the dataset dir
};
LoadedDataset load_dataset(const std::string& dir);

}  // namespace flowcast
