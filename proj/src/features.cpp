// SPDX-License-Identifier: Apache-2.0
#include "flowcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "flowcast/traffic.hpp"

namespace flowcast {

std::array<double, 3> device_kind_one_hot(DeviceKind k) {
  std::array<double, 3> v{0.0, 0.0, 0.0};
  v[static_cast<int>(k)] = 1.0;
  return v;
}

WindowFeatures compute_window_features(const Scenario& s) {
  const int w = s.window_count();
  WindowFeatures out;
  out.windows = w;

  // Dense positions in ascending-id order.
  std::vector<const Flow*> flows(s.flows.size());
  for (size_t i = 0; i < s.flows.size(); ++i) flows[i] = &s.flows[i];
  std::sort(flows.begin(), flows.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<const Link*> links(s.links.size());
  for (size_t i = 0; i < s.links.size(); ++i) links[i] = &s.links[i];
  std::sort(links.begin(), links.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<const Queue*> queues(s.queues.size());
  for (size_t i = 0; i < s.queues.size(); ++i) queues[i] = &s.queues[i];
  std::sort(queues.begin(), queues.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::unordered_map<int, int> link_pos;
  for (size_t i = 0; i < links.size(); ++i) link_pos[links[i]->id] = static_cast<int>(i);

  out.flow_avg_load.assign(flows.size(), std::vector<double>(w, 0.0));
  out.flow_packet_rate.assign(flows.size(), std::vector<double>(w, 0.0));
  out.flow_packet_size.resize(flows.size());
  out.link_expected_load.assign(links.size(), std::vector<double>(w, 0.0));

  for (size_t fi = 0; fi < flows.size(); ++fi) {
    const Flow& f = *flows[fi];
    out.flow_packet_size[fi] = f.packet_size;
    for (double t : generate_packets(f, s.duration_s)) {
      const int win = static_cast<int>(std::floor(t / s.window_s));
      if (win < 0 || win >= w) continue;
      out.flow_packet_rate[fi][win] += 1.0;
    }
    for (int t = 0; t < w; ++t) {
      out.flow_avg_load[fi][t] = out.flow_packet_rate[fi][t] * f.packet_size / s.window_s;
      out.flow_packet_rate[fi][t] /= s.window_s;
    }
    for (const Hop& h : f.path) {
      const int li = link_pos.at(h.link);
      const double bw = links[li]->bandwidth;
      for (int t = 0; t < w; ++t)
        out.link_expected_load[li][t] += out.flow_avg_load[fi][t] / bw;
    }
  }

  out.queue_device_type.resize(queues.size());
  for (size_t qi = 0; qi < queues.size(); ++qi)
    out.queue_device_type[qi] = device_kind_one_hot(s.devices[queues[qi]->device].kind);

  return out;
}

}  // namespace flowcast
