// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "flowcast/scenario.hpp"

namespace flowcast::testing {

// Chain of `n_dev` devices 0..n_dev-1 (ends are endpoints, middles routers),
// one forward link per adjacent pair, one queue per link, and a single flow
// 0 -> n_dev-1 over the whole chain. All links share bandwidth/prop/buffer.
inline Scenario chain_scenario(int n_dev, double bandwidth, double prop, int buffer,
                               double packet_size, TrafficProfile profile, double duration,
                               double window) {
  Scenario s;
  s.duration_s = duration;
  s.window_s = window;
  for (int d = 0; d < n_dev; ++d) {
    const bool end = (d == 0 || d == n_dev - 1);
    s.devices.push_back({d, end ? DeviceKind::Endpoint : DeviceKind::Router});
  }
  for (int i = 0; i < n_dev - 1; ++i) {
    s.links.push_back({i, i, i + 1, bandwidth, prop});
    s.queues.push_back({i, i, i, buffer});
  }
  Flow f;
  f.id = 0;
  f.src_device = 0;
  f.dst_device = n_dev - 1;
  for (int i = 0; i < n_dev - 1; ++i) f.path.push_back({i, i});
  f.packet_size = packet_size;
  f.profile = std::move(profile);
  s.flows.push_back(f);
  validate(s);
  return s;
}

}  // namespace flowcast::testing
