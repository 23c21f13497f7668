// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowcast/scenario.hpp"

namespace flowcast {

// One packet's fate after simulation. Times are in seconds.
struct PacketRecord {
  int flow = 0;
  std::int64_t seq = 0;
  double gen_time = 0.0;
  double delivery_time = 0.0;  // meaningful only when !dropped
  bool dropped = false;
};

// Summary statistics of one per-window sample set (all values in seconds).
struct WindowStats {
  double avg = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
};

// Per-flow, per-window truth. delay/jitter are absent when the window holds
// no samples of that kind.
struct FlowWindowTruth {
  std::int64_t packet_count = 0;  // packets generated in the window
  std::int64_t drop_count = 0;    // of those, how many were dropped
  std::optional<WindowStats> delay;
  std::optional<WindowStats> jitter;
};

struct GroundTruth {
  // truth[flow_id][window_index]
  std::map<int, std::vector<FlowWindowTruth>> flows;
  int windows = 0;
  double window_s = 0.0;
};

// Optional per-hop event trace for white-box tests (FIFO order, work
// conservation).
struct HopEvent {
  int queue = 0;         // queue id
  int flow = 0;
  std::int64_t seq = 0;
  double enqueue_time = 0.0;
  double service_start = 0.0;
  double service_end = 0.0;
};

struct SimResult {
  std::vector<PacketRecord> packets;  // ordered by (flow, seq)
  std::vector<HopEvent> hop_events;   // filled only when trace=true
};

// Event-driven packet-level simulation of the scenario. Deterministic.
SimResult simulate(const Scenario& s, bool trace = false);

// Linear-interpolation percentile (same convention as numpy default / R type 7)
// over an already sorted sample vector. q in [0,1]. n must be >= 1.
double percentile_sorted(const std::vector<double>& sorted_samples, double q);

WindowStats window_stats(std::vector<double> samples);  // sorts internally

// Windowed aggregation of packet records into ground truth.
// Delays aggregate into the window of the packet's generation time; the
// jitter sample |d_i - d_{i-1}| between consecutive delivered packets lands in
// the window of the LATER packet's generation time. Flows with no generated
// packets are absent; windows with no delivered packets carry no delay stats.
GroundTruth aggregate(const std::vector<PacketRecord>& packets, double window_s, int windows);
GroundTruth aggregate(const std::vector<PacketRecord>& packets, const Scenario& s);

// JSON round-trip for ground truth ({flow_id: [per-window objects]}).
std::string ground_truth_to_json_text(const GroundTruth& gt);
GroundTruth ground_truth_from_json_text(const std::string& text);
void save_ground_truth(const std::string& path, const GroundTruth& gt);
GroundTruth load_ground_truth(const std::string& path);

// CSV dump of packet records: header flow,seq,gen_time,delivery_time,dropped.
std::string packets_to_csv(const std::vector<PacketRecord>& packets);

}  // namespace flowcast
