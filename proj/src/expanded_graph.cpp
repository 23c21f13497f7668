// SPDX-License-Identifier: Apache-2.0
#include "flowcast/expanded_graph.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace flowcast {

namespace {

template <typename T, typename GetId>
std::vector<int> sorted_ids(const std::vector<T>& items, GetId get_id) {
  std::vector<int> ids(items.size());
  for (size_t i = 0; i < items.size(); ++i) ids[i] = get_id(items[i]);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::unordered_map<int, int> index_of(const std::vector<int>& ids) {
  std::unordered_map<int, int> m;
  for (size_t i = 0; i < ids.size(); ++i) m[ids[i]] = static_cast<int>(i);
  return m;
}

}  // namespace

ExpandedGraph build_expanded_graph(const Scenario& s) {
  ExpandedGraph g;
  g.n_devices = static_cast<int>(s.devices.size());
  g.n_links = static_cast<int>(s.links.size());
  g.n_queues = static_cast<int>(s.queues.size());
  g.n_flows = static_cast<int>(s.flows.size());

  g.device_ids = sorted_ids(s.devices, [](const Device& d) { return d.id; });
  g.link_ids = sorted_ids(s.links, [](const Link& l) { return l.id; });
  g.queue_ids = sorted_ids(s.queues, [](const Queue& q) { return q.id; });
  g.flow_ids = sorted_ids(s.flows, [](const Flow& f) { return f.id; });

  const auto dev_idx = index_of(g.device_ids);
  const auto link_idx = index_of(g.link_ids);
  const auto queue_idx = index_of(g.queue_ids);
  const auto flow_idx = index_of(g.flow_ids);

  g.queue_device.assign(g.n_queues, 0);
  g.link_queue.assign(g.n_links, 0);
  g.device_queues.assign(g.n_devices, {});
  for (const Queue& q : s.queues) {
    const int qi = queue_idx.at(q.id);
    const int di = dev_idx.at(q.device);
    g.queue_device[qi] = di;
    g.link_queue[link_idx.at(q.out_link)] = qi;
  }
  for (int qi = 0; qi < g.n_queues; ++qi) g.device_queues[g.queue_device[qi]].push_back(qi);
  for (auto& qs : g.device_queues) std::sort(qs.begin(), qs.end());

  g.flow_paths.assign(g.n_flows, {});
  g.queue_flows.assign(g.n_queues, {});
  for (const Flow& f : s.flows) {
    const int fi = flow_idx.at(f.id);
    auto& path = g.flow_paths[fi];
    path.reserve(f.path.size());
    for (const Hop& h : f.path)
      path.push_back({link_idx.at(h.link), queue_idx.at(h.queue)});
  }
  for (int fi = 0; fi < g.n_flows; ++fi)
    for (size_t pos = 0; pos < g.flow_paths[fi].size(); ++pos)
      g.queue_flows[g.flow_paths[fi][pos].queue].push_back({fi, static_cast<int>(pos)});
  // Canonical incidence order: by flow index, then position.
  for (auto& qf : g.queue_flows)
    std::sort(qf.begin(), qf.end(), [](const auto& a, const auto& b) {
      return a.flow != b.flow ? a.flow < b.flow : a.pos < b.pos;
    });
  return g;
}

std::string expanded_graph_edge_list(const ExpandedGraph& g) {
  std::ostringstream out;
  out << "kind_src,id_src,kind_dst,id_dst,position\n";
  for (int qi = 0; qi < g.n_queues; ++qi)
    out << "queue," << g.queue_ids[qi] << ",device," << g.device_ids[g.queue_device[qi]] << ",\n";
  for (int li = 0; li < g.n_links; ++li)
    out << "queue," << g.queue_ids[g.link_queue[li]] << ",link," << g.link_ids[li] << ",\n";
  for (int fi = 0; fi < g.n_flows; ++fi)
    for (size_t pos = 0; pos < g.flow_paths[fi].size(); ++pos) {
      const auto& h = g.flow_paths[fi][pos];
      out << "flow," << g.flow_ids[fi] << ",queue," << g.queue_ids[h.queue] << "," << pos << "\n";
      out << "flow," << g.flow_ids[fi] << ",link," << g.link_ids[h.link] << "," << pos << "\n";
    }
  return out.str();
}

}  // namespace flowcast
