// SPDX-License-Identifier: Apache-2.0
#include "flowcast/scenario.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "flowcast/error.hpp"

namespace flowcast {

const char* to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::Router: return "router";
    case DeviceKind::Switch: return "switch";
    case DeviceKind::Endpoint: return "endpoint";
  }
  return "?";
}

DeviceKind device_kind_from_string(const std::string& s) {
  if (s == "router") return DeviceKind::Router;
  if (s == "switch") return DeviceKind::Switch;
  if (s == "endpoint") return DeviceKind::Endpoint;
  throw ParseError("unknown device kind \"" + s + "\"");
}

int Scenario::window_count() const {
  if (window_s <= 0.0) return 0;
  return static_cast<int>(std::llround(duration_s / window_s));
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

void validate_profile(const TrafficProfile& p, const std::string& ctx) {
  if (const auto* cb = std::get_if<ConstantBurst>(&p)) {
    if (cb->rate <= 0.0) fail(ctx + ": rate must be > 0");
    if (cb->burst_duration <= 0.0) fail(ctx + ": burst_duration must be > 0");
    if (cb->period <= 0.0) fail(ctx + ": period must be > 0");
    if (cb->burst_duration > cb->period) fail(ctx + ": burst_duration must be <= period");
    if (cb->stop < cb->start) fail(ctx + ": stop must be >= start");
  } else if (const auto* mb = std::get_if<MultiBurst>(&p)) {
    if (mb->components.empty()) fail(ctx + ": multi_burst needs at least one component");
    for (size_t i = 0; i < mb->components.size(); ++i)
      validate_profile(mb->components[i], ctx + ".components[" + std::to_string(i) + "]");
  } else if (const auto* tr = std::get_if<TraceReplay>(&p)) {
    for (size_t i = 1; i < tr->timestamps.size(); ++i)
      if (tr->timestamps[i] < tr->timestamps[i - 1])
        fail(ctx + ": timestamps must be sorted ascending");
    for (double t : tr->timestamps)
      if (t < 0.0) fail(ctx + ": timestamps must be >= 0");
  }
}

}  // namespace

void validate(const Scenario& s) {
  if (s.devices.empty()) fail("scenario has no devices");
  for (size_t i = 0; i < s.devices.size(); ++i)
    if (s.devices[i].id != static_cast<int>(i))
      fail("device ids must be dense 0..N-1 (device at position " + std::to_string(i) +
           " has id " + std::to_string(s.devices[i].id) + ")");

  auto has_device = [&](int id) { return id >= 0 && id < static_cast<int>(s.devices.size()); };

  std::unordered_map<int, const Link*> link_by_id;
  for (const Link& l : s.links) {
    if (!link_by_id.emplace(l.id, &l).second)
      fail("duplicate link id " + std::to_string(l.id));
    if (!has_device(l.src_device)) fail("link " + std::to_string(l.id) + ": unknown src_device");
    if (!has_device(l.dst_device)) fail("link " + std::to_string(l.id) + ": unknown dst_device");
    if (l.src_device == l.dst_device) fail("link " + std::to_string(l.id) + ": src must differ from dst");
    if (l.bandwidth <= 0.0) fail("link " + std::to_string(l.id) + ": bandwidth must be > 0");
    if (l.propagation_delay < 0.0)
      fail("link " + std::to_string(l.id) + ": propagation_delay must be >= 0");
  }

  std::unordered_map<int, const Queue*> queue_by_id;
  std::unordered_set<int> fed_links;
  for (const Queue& q : s.queues) {
    if (!queue_by_id.emplace(q.id, &q).second)
      fail("duplicate queue id " + std::to_string(q.id));
    if (!has_device(q.device)) fail("queue " + std::to_string(q.id) + ": unknown device");
    auto it = link_by_id.find(q.out_link);
    if (it == link_by_id.end()) fail("queue " + std::to_string(q.id) + ": unknown out_link");
    if (it->second->src_device != q.device)
      fail("queue " + std::to_string(q.id) + ": must sit at its link's src_device");
    if (!fed_links.insert(q.out_link).second)
      fail("link " + std::to_string(q.out_link) + " is fed by more than one queue");
    if (q.buffer_size <= 0) fail("queue " + std::to_string(q.id) + ": buffer_size must be > 0");
  }
  if (fed_links.size() != s.links.size())
    fail("every link needs exactly one feeding queue (" + std::to_string(s.links.size()) +
         " links, " + std::to_string(fed_links.size()) + " fed)");

  if (s.flows.empty()) fail("scenario needs at least 1 flow");
  std::unordered_set<int> flow_ids;
  for (const Flow& f : s.flows) {
    const std::string ctx = "flow " + std::to_string(f.id);
    if (!flow_ids.insert(f.id).second) fail("duplicate flow id " + std::to_string(f.id));
    if (!has_device(f.src_device)) fail(ctx + ": unknown src_device");
    if (!has_device(f.dst_device)) fail(ctx + ": unknown dst_device");
    if (s.devices[f.src_device].kind != DeviceKind::Endpoint)
      fail(ctx + ": src_device must be an endpoint");
    if (s.devices[f.dst_device].kind != DeviceKind::Endpoint)
      fail(ctx + ": dst_device must be an endpoint");
    if (f.path.empty()) fail(ctx + ": path must not be empty");
    if (f.packet_size <= 0.0) fail(ctx + ": packet_size must be > 0");
    for (size_t i = 0; i < f.path.size(); ++i) {
      const Hop& h = f.path[i];
      auto qit = queue_by_id.find(h.queue);
      if (qit == queue_by_id.end()) fail(ctx + ": unknown queue id " + std::to_string(h.queue));
      auto lit = link_by_id.find(h.link);
      if (lit == link_by_id.end()) fail(ctx + ": unknown link id " + std::to_string(h.link));
      if (qit->second->out_link != h.link)
        fail(ctx + ": hop " + std::to_string(i) + " pairs queue " + std::to_string(h.queue) +
             " with link " + std::to_string(h.link) + " it does not feed");
      if (i == 0 && qit->second->device != f.src_device)
        fail(ctx + ": path must start at src_device");
      if (i > 0) {
        auto prev = link_by_id.find(f.path[i - 1].link);
        if (prev->second->dst_device != qit->second->device)
          fail(ctx + ": path hops " + std::to_string(i - 1) + "->" + std::to_string(i) +
               " are not contiguous");
      }
    }
    if (link_by_id.find(f.path.back().link)->second->dst_device != f.dst_device)
      fail(ctx + ": path must end at dst_device");
    validate_profile(f.profile, ctx + ".profile");
  }

  if (s.duration_s <= 0.0) fail("duration_s must be > 0");
  if (s.window_s <= 0.0) fail("window_s must be > 0");
  const double w = s.duration_s / s.window_s;
  if (std::abs(w - std::llround(w)) > 1e-9 * std::max(1.0, w))
    fail("duration_s must be an integer multiple of window_s");
  if (s.window_count() < 1) fail("scenario needs at least 1 window");
}

namespace {

bool eq(const ConstantBurst& a, const ConstantBurst& b) {
  return a.rate == b.rate && a.burst_duration == b.burst_duration && a.period == b.period &&
         a.start == b.start && a.stop == b.stop;
}

bool eq(const TrafficProfile& a, const TrafficProfile& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ca = std::get_if<ConstantBurst>(&a)) return eq(*ca, std::get<ConstantBurst>(b));
  if (const auto* ma = std::get_if<MultiBurst>(&a)) {
    const auto& mb = std::get<MultiBurst>(b);
    if (ma->components.size() != mb.components.size()) return false;
    for (size_t i = 0; i < ma->components.size(); ++i)
      if (!eq(ma->components[i], mb.components[i])) return false;
    return true;
  }
  return std::get<TraceReplay>(a).timestamps == std::get<TraceReplay>(b).timestamps;
}

}  // namespace

bool operator==(const Scenario& a, const Scenario& b) {
  if (a.devices.size() != b.devices.size() || a.links.size() != b.links.size() ||
      a.queues.size() != b.queues.size() || a.flows.size() != b.flows.size())
    return false;
  for (size_t i = 0; i < a.devices.size(); ++i)
    if (a.devices[i].id != b.devices[i].id || a.devices[i].kind != b.devices[i].kind) return false;
  for (size_t i = 0; i < a.links.size(); ++i) {
    const Link &x = a.links[i], &y = b.links[i];
    if (x.id != y.id || x.src_device != y.src_device || x.dst_device != y.dst_device ||
        x.bandwidth != y.bandwidth || x.propagation_delay != y.propagation_delay)
      return false;
  }
  for (size_t i = 0; i < a.queues.size(); ++i) {
    const Queue &x = a.queues[i], &y = b.queues[i];
    if (x.id != y.id || x.device != y.device || x.out_link != y.out_link ||
        x.buffer_size != y.buffer_size)
      return false;
  }
  for (size_t i = 0; i < a.flows.size(); ++i) {
    const Flow &x = a.flows[i], &y = b.flows[i];
    if (x.id != y.id || x.src_device != y.src_device || x.dst_device != y.dst_device ||
        x.packet_size != y.packet_size)
      return false;
    if (x.path.size() != y.path.size()) return false;
    for (size_t j = 0; j < x.path.size(); ++j)
      if (x.path[j].link != y.path[j].link || x.path[j].queue != y.path[j].queue) return false;
    if (!eq(x.profile, y.profile)) return false;
  }
  return a.duration_s == b.duration_s && a.window_s == b.window_s;
}

}  // namespace flowcast
