// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "flowcast/scenario.hpp"

namespace flowcast {

// Time-varying model inputs. Rows are indexed by dense position in
// ascending-id order, the same canonical order the expanded graph uses.
struct WindowFeatures {
  int windows = 0;
  std::vector<std::vector<double>> flow_avg_load;      // [flow][window], bits/s
  std::vector<std::vector<double>> flow_packet_rate;   // [flow][window], packets/s
  std::vector<double> flow_packet_size;                // [flow], bits
  std::vector<std::vector<double>> link_expected_load; // [link][window], fraction of bandwidth
  std::vector<std::array<double, 3>> queue_device_type;// [queue], one-hot (router, switch, endpoint)
};

// Offered-load features: loads count packets by generation time,
// floor(gen_time / window_s); packets at exactly t = duration are excluded.
// Link expected_load is the sum over traversing flows of avg_load divided by
// the link bandwidth, deliberately not clamped at 1.
WindowFeatures compute_window_features(const Scenario& s);

std::array<double, 3> device_kind_one_hot(DeviceKind k);

}  // namespace flowcast
