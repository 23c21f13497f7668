// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "flowcast/scenario.hpp"

namespace flowcast {

// Heterogeneous interaction graph over flows, links, queues and devices.
// All indices are dense renumberings in ascending-original-id order, so
// downstream aggregation is gather/scatter over contiguous ranges.
struct ExpandedGraph {
  struct HopRef {
    int link = 0;   // dense link index
    int queue = 0;  // dense queue index
  };
  struct FlowPos {
    int flow = 0;  // dense flow index
    int pos = 0;   // hop position within that flow's path
  };

  int n_devices = 0;
  int n_links = 0;
  int n_queues = 0;
  int n_flows = 0;

  std::vector<std::vector<HopRef>> flow_paths;   // [flow] -> ordered hops
  std::vector<int> queue_device;                 // [queue] -> device
  std::vector<int> link_queue;                   // [link] -> feeding queue (bijection)
  std::vector<std::vector<FlowPos>> queue_flows; // [queue] -> (flow, pos) incidences
  std::vector<std::vector<int>> device_queues;   // [device] -> its queues

  // Original ids for each dense index, for debug output and relabeling tests.
  std::vector<int> device_ids, link_ids, queue_ids, flow_ids;
};

ExpandedGraph build_expanded_graph(const Scenario& s);

// Edge list dump: one `kind_src,id_src,kind_dst,id_dst,position` line per
// interaction, using original ids.
std::string expanded_graph_edge_list(const ExpandedGraph& g);

}  // namespace flowcast
