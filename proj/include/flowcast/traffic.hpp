// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "flowcast/scenario.hpp"

namespace flowcast {

// Packet generation times in [0, duration_s), sorted ascending.
// ConstantBurst emits back-to-back at `rate` (gap = packet_size/rate) within
// each burst interval; MultiBurst is the merged sum of its components;
// TraceReplay returns its timestamps filtered to [0, duration_s).
std::vector<double> generate_packets(const TrafficProfile& profile, double packet_size_bits,
                                     double duration_s);
std::vector<double> generate_packets(const Flow& f, double duration_s);

}  // namespace flowcast
