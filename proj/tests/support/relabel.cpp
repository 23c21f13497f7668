// SPDX-License-Identifier: Apache-2.0
#include "support/relabel.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

namespace flowcast::testing {

Scenario relabel_scenario(const Scenario& s, std::mt19937_64& rng, std::map<int, int>& flow_map) {
  const int nd = static_cast<int>(s.devices.size());
  std::vector<int> dperm(nd);
  std::iota(dperm.begin(), dperm.end(), 0);
  std::shuffle(dperm.begin(), dperm.end(), rng);

  auto fresh_ids = [&](std::size_t k) {
    std::set<int> pool;
    std::uniform_int_distribution<int> dist(0, 99999);
    while (pool.size() < k) pool.insert(dist(rng));
    std::vector<int> ids(pool.begin(), pool.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    return ids;
  };
  std::map<int, int> lmap, qmap;
  flow_map.clear();
  {
    const auto ids = fresh_ids(s.links.size());
    for (std::size_t i = 0; i < s.links.size(); ++i) lmap[s.links[i].id] = ids[i];
  }
  {
    const auto ids = fresh_ids(s.queues.size());
    for (std::size_t i = 0; i < s.queues.size(); ++i) qmap[s.queues[i].id] = ids[i];
  }
  {
    const auto ids = fresh_ids(s.flows.size());
    for (std::size_t i = 0; i < s.flows.size(); ++i) flow_map[s.flows[i].id] = ids[i];
  }

  Scenario out = s;
  for (auto& d : out.devices) d.id = dperm[d.id];
  std::sort(out.devices.begin(), out.devices.end(),
            [](const Device& a, const Device& b) { return a.id < b.id; });
  for (auto& l : out.links) {
    l.id = lmap[l.id];
    l.src_device = dperm[l.src_device];
    l.dst_device = dperm[l.dst_device];
  }
  for (auto& q : out.queues) {
    q.id = qmap[q.id];
    q.device = dperm[q.device];
    q.out_link = lmap[q.out_link];
  }
  for (auto& f : out.flows) {
    f.id = flow_map[f.id];
    f.src_device = dperm[f.src_device];
    f.dst_device = dperm[f.dst_device];
    for (auto& hop : f.path) {
      hop.link = lmap[hop.link];
      hop.queue = qmap[hop.queue];
    }
  }
  std::shuffle(out.links.begin(), out.links.end(), rng);
  std::shuffle(out.queues.begin(), out.queues.end(), rng);
  std::shuffle(out.flows.begin(), out.flows.end(), rng);
  validate(out);
  return out;
}

}  // namespace flowcast::testing
