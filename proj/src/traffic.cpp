// SPDX-License-Identifier: Apache-2.0
#include "flowcast/traffic.hpp"

#include <algorithm>

namespace flowcast {

namespace {

void emit_burst_train(const ConstantBurst& b, double packet_size_bits, double duration_s,
                      std::vector<double>& out) {
  const double stop = std::min(b.stop, duration_s);
  const double gap = packet_size_bits / b.rate;
  for (long long k = 0;; ++k) {
    const double burst_start = b.start + static_cast<double>(k) * b.period;
    if (burst_start >= stop) break;
    for (long long j = 0;; ++j) {
      const double offset = static_cast<double>(j) * gap;
      if (offset >= b.burst_duration) break;
      const double t = burst_start + offset;
      if (t >= stop) break;
      out.push_back(t);
    }
  }
}

}  // namespace

std::vector<double> generate_packets(const TrafficProfile& profile, double packet_size_bits,
                                     double duration_s) {
  std::vector<double> out;
  if (const auto* cb = std::get_if<ConstantBurst>(&profile)) {
    emit_burst_train(*cb, packet_size_bits, duration_s, out);
  } else if (const auto* mb = std::get_if<MultiBurst>(&profile)) {
    for (const ConstantBurst& c : mb->components)
      emit_burst_train(c, packet_size_bits, duration_s, out);
    std::stable_sort(out.begin(), out.end());
  } else {
    const auto& ts = std::get<TraceReplay>(profile).timestamps;
    for (double t : ts)
      if (t >= 0.0 && t < duration_s) out.push_back(t);
  }
  return out;
}

std::vector<double> generate_packets(const Flow& f, double duration_s) {
  return generate_packets(f.profile, f.packet_size, duration_s);
}

}  // namespace flowcast
