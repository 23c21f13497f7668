// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <variant>
#include <vector>

namespace flowcast {

enum class DeviceKind { Router, Switch, Endpoint };

const char* to_string(DeviceKind k);
DeviceKind device_kind_from_string(const std::string& s);

struct Device {
  int id = 0;  // dense 0..N-1
  DeviceKind kind = DeviceKind::Router;
};

// Directed. A physical cable is modeled as two Links.
struct Link {
  int id = 0;
  int src_device = 0;
  int dst_device = 0;
  double bandwidth = 0.0;          // bits/s, > 0
  double propagation_delay = 0.0;  // s, >= 0
};

// Output queue feeding exactly one link, located at that link's source device.
struct Queue {
  int id = 0;
  int device = 0;
  int out_link = 0;
  int buffer_size = 0;  // waiting packets; the one in service is not counted
};

// Packets emitted back-to-back at `rate` during each burst interval.
struct ConstantBurst {
  double rate = 0.0;            // bits/s while bursting, > 0
  double burst_duration = 0.0;  // s, 0 < burst_duration <= period
  double period = 0.0;          // s
  double start = 0.0;           // s
  double stop = 0.0;            // s, emission window is [start, stop)
};

// Emission is the merged sum of the per-component schedules.
struct MultiBurst {
  std::vector<ConstantBurst> components;
};

struct TraceReplay {
  std::vector<double> timestamps;  // s, sorted non-decreasing
};

using TrafficProfile = std::variant<ConstantBurst, MultiBurst, TraceReplay>;

struct Hop {
  int link = 0;
  int queue = 0;  // the queue feeding `link`
};

struct Flow {
  int id = 0;
  int src_device = 0;  // an Endpoint
  int dst_device = 0;  // an Endpoint
  std::vector<Hop> path;
  double packet_size = 0.0;  // bits, constant per flow
  TrafficProfile profile;
};

struct Scenario {
  std::vector<Device> devices;
  std::vector<Link> links;
  std::vector<Queue> queues;
  std::vector<Flow> flows;
  double duration_s = 0.0;
  double window_s = 0.0;  // duration_s must be an integer multiple

  int window_count() const;
};

// Throws ValidationError naming the first violated constraint.
void validate(const Scenario& s);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);

// Structural equality, used by round-trip checks.
bool operator==(const Scenario& a, const Scenario& b);

}  // namespace flowcast
