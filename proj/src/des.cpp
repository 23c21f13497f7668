// SPDX-License-Identifier: Apache-2.0
#include "flowcast/des.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "flowcast/error.hpp"
#include "flowcast/io_util.hpp"
#include "flowcast/traffic.hpp"

namespace flowcast {

namespace {

// The simulator keeps time as exact double-precision seconds: every event
// time is a generation timestamp plus a sum of per-hop transmission and
// propagation terms, each computed once by a fixed expression. Runs are
// deterministic, bit-reproducible, and agree with analytic expectations to
// floating-point accuracy. Simultaneous events follow the total order
// (time, kind, flow id, seq), with arrivals before service completions.

enum EventKind : int { kArrival = 0, kServiceDone = 1 };

struct Event {
  double t = 0.0;
  int kind = kArrival;
  int flow_id = 0;
  std::int64_t seq = 0;
  int hop = 0;
};

// priority_queue pops the *greatest* element, so "later" means greater under
// the deterministic total order (time, kind, flow id, seq).
struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.flow_id != b.flow_id) return a.flow_id > b.flow_id;
    return a.seq > b.seq;
  }
};

struct QueuedPacket {
  int flow_ord = 0;
  std::int64_t seq = 0;
  int hop = 0;
  double enqueue_t = 0.0;
};

struct QueueState {
  std::deque<QueuedPacket> waiting;
  bool busy = false;
  QueuedPacket in_service{};
  double service_start_t = 0.0;
  int buffer_size = 0;
  int queue_id = 0;
};

struct FlowRuntime {
  const Flow* flow = nullptr;
  std::vector<double> gen_times;  // seconds, ascending
  std::vector<double> hop_tx_s;   // packet_size / bandwidth per hop
  std::vector<double> hop_prop_s;
  std::vector<int> hop_queue;  // ordinal into the queue state array
  std::size_t record_base = 0;
};

}  // namespace

SimResult simulate(const Scenario& s, bool trace) {
  validate(s);

  std::unordered_map<int, const Link*> link_by_id;
  for (const Link& l : s.links) link_by_id[l.id] = &l;

  std::vector<QueueState> qstates(s.queues.size());
  std::unordered_map<int, int> queue_ord;
  {
    std::vector<const Queue*> by_id;
    by_id.reserve(s.queues.size());
    for (const Queue& q : s.queues) by_id.push_back(&q);
    std::sort(by_id.begin(), by_id.end(),
              [](const Queue* a, const Queue* b) { return a->id < b->id; });
    for (std::size_t i = 0; i < by_id.size(); ++i) {
      queue_ord[by_id[i]->id] = static_cast<int>(i);
      qstates[i].buffer_size = by_id[i]->buffer_size;
      qstates[i].queue_id = by_id[i]->id;
    }
  }

  std::vector<FlowRuntime> flows;
  flows.reserve(s.flows.size());
  {
    std::vector<const Flow*> by_id;
    by_id.reserve(s.flows.size());
    for (const Flow& f : s.flows) by_id.push_back(&f);
    std::sort(by_id.begin(), by_id.end(),
              [](const Flow* a, const Flow* b) { return a->id < b->id; });
    for (const Flow* f : by_id) {
      FlowRuntime rt;
      rt.flow = f;
      rt.gen_times = generate_packets(*f, s.duration_s);
      for (const Hop& h : f->path) {
        const Link& link = *link_by_id.at(h.link);
        rt.hop_tx_s.push_back(f->packet_size / link.bandwidth);
        rt.hop_prop_s.push_back(link.propagation_delay);
        rt.hop_queue.push_back(queue_ord.at(h.queue));
      }
      flows.push_back(std::move(rt));
    }
  }

  std::unordered_map<int, int> flow_ord_by_id;
  SimResult result;
  std::size_t total_packets = 0;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    flows[i].record_base = total_packets;
    flow_ord_by_id[flows[i].flow->id] = static_cast<int>(i);
    total_packets += flows[i].gen_times.size();
  }
  result.packets.resize(total_packets);
  for (const FlowRuntime& rt : flows)
    for (std::size_t seq = 0; seq < rt.gen_times.size(); ++seq) {
      PacketRecord& rec = result.packets[rt.record_base + seq];
      rec.flow = rt.flow->id;
      rec.seq = static_cast<std::int64_t>(seq);
      rec.gen_time = rt.gen_times[seq];
    }

  std::priority_queue<Event, std::vector<Event>, EventLater> heap;
  for (const FlowRuntime& rt : flows)
    for (std::size_t seq = 0; seq < rt.gen_times.size(); ++seq)
      heap.push(Event{rt.gen_times[seq], kArrival, rt.flow->id,
                      static_cast<std::int64_t>(seq), 0});

  auto start_service = [&](QueueState& q, const QueuedPacket& p, double now) {
    q.busy = true;
    q.in_service = p;
    q.service_start_t = now;
    const FlowRuntime& rt = flows[p.flow_ord];
    heap.push(Event{now + rt.hop_tx_s[p.hop], kServiceDone, rt.flow->id, p.seq, p.hop});
  };

  while (!heap.empty()) {
    const Event e = heap.top();
    heap.pop();
    const int ord = flow_ord_by_id.at(e.flow_id);
    const FlowRuntime& rt = flows[ord];
    if (e.kind == kArrival) {
      QueueState& q = qstates[rt.hop_queue[e.hop]];
      const QueuedPacket p{ord, e.seq, e.hop, e.t};
      if (!q.busy) {
        start_service(q, p, e.t);
      } else if (static_cast<int>(q.waiting.size()) < q.buffer_size) {
        q.waiting.push_back(p);
      } else {
        result.packets[rt.record_base + e.seq].dropped = true;
      }
    } else {
      QueueState& q = qstates[rt.hop_queue[e.hop]];
      const QueuedPacket done = q.in_service;
      if (trace)
        result.hop_events.push_back(HopEvent{q.queue_id, rt.flow->id, done.seq, done.enqueue_t,
                                             q.service_start_t, e.t});
      const double arrive = e.t + rt.hop_prop_s[e.hop];
      if (e.hop + 1 == static_cast<int>(rt.flow->path.size())) {
        PacketRecord& rec = result.packets[rt.record_base + e.seq];
        rec.delivery_time = arrive;
      } else {
        heap.push(Event{arrive, kArrival, rt.flow->id, e.seq, e.hop + 1});
      }
      if (!q.waiting.empty()) {
        const QueuedPacket next = q.waiting.front();
        q.waiting.pop_front();
        start_service(q, next, e.t);
      } else {
        q.busy = false;
      }
    }
  }
  return result;
}

double percentile_sorted(const std::vector<double>& sorted_samples, double q) {
  const std::size_t n = sorted_samples.size();
  if (n == 0) throw Error("percentile of empty sample set");
  const double h = static_cast<double>(n - 1) * q;
  const auto k = static_cast<std::size_t>(h);
  if (k + 1 >= n) return sorted_samples.back();
  const double frac = h - static_cast<double>(k);
  return sorted_samples[k] + frac * (sorted_samples[k + 1] - sorted_samples[k]);
}

WindowStats window_stats(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  WindowStats st;
  double sum = 0.0;
  for (double v : samples) sum += v;
  st.avg = sum / static_cast<double>(samples.size());
  st.median = percentile_sorted(samples, 0.50);
  st.p90 = percentile_sorted(samples, 0.90);
  st.p95 = percentile_sorted(samples, 0.95);
  st.p99 = percentile_sorted(samples, 0.99);
  return st;
}

GroundTruth aggregate(const std::vector<PacketRecord>& packets, double window_s, int windows) {
  GroundTruth gt;
  gt.windows = windows;
  gt.window_s = window_s;
  const int w_max = gt.windows - 1;
  auto window_of = [&](double gen_time) {
    const int w = static_cast<int>(std::floor(gen_time / window_s));
    return std::clamp(w, 0, w_max);
  };

  // Per-flow, per-window sample sets; flows appear as their records do.
  std::map<int, std::vector<std::vector<double>>> delay_samples;
  std::map<int, std::vector<std::vector<double>>> jitter_samples;

  // Records are ordered by (flow, seq); track the previous delivered delay of
  // the current flow to form consecutive-delivery jitter samples.
  int prev_flow = -1;
  bool have_prev = false;
  double prev_delay = 0.0;
  for (const PacketRecord& p : packets) {
    if (p.flow != prev_flow) {
      prev_flow = p.flow;
      have_prev = false;
    }
    auto& cells = gt.flows[p.flow];
    if (cells.empty()) {
      cells.resize(gt.windows);
      delay_samples[p.flow].resize(gt.windows);
      jitter_samples[p.flow].resize(gt.windows);
    }
    const int w = window_of(p.gen_time);
    FlowWindowTruth& cell = cells[w];
    cell.packet_count += 1;
    if (p.dropped) {
      cell.drop_count += 1;
      continue;  // dropped packets contribute to no statistic
    }
    const double delay = p.delivery_time - p.gen_time;
    delay_samples[p.flow][w].push_back(delay);
    if (have_prev) {
      // Physically identical delays can differ in the last ulp because each is
      // computed relative to its own generation timestamp; any real queueing
      // difference is many orders above a picosecond, so snap residue to an
      // exact zero to keep zero-jitter windows at zero.
      double dj = std::abs(delay - prev_delay);
      if (dj < 1e-12) dj = 0.0;
      jitter_samples[p.flow][w].push_back(dj);
    }
    prev_delay = delay;
    have_prev = true;
  }

  for (auto& [flow_id, cells] : gt.flows)
    for (int w = 0; w < gt.windows; ++w) {
      auto& d = delay_samples[flow_id][w];
      auto& j = jitter_samples[flow_id][w];
      if (!d.empty()) cells[w].delay = window_stats(std::move(d));
      if (!j.empty()) cells[w].jitter = window_stats(std::move(j));
    }
  return gt;
}

GroundTruth aggregate(const std::vector<PacketRecord>& packets, const Scenario& s) {
  return aggregate(packets, s.window_s, s.window_count());
}

namespace {

nlohmann::ordered_json stats_to_json(const WindowStats& st) {
  return nlohmann::ordered_json{{"avg", st.avg},
                                {"median", st.median},
                                {"p90", st.p90},
                                {"p95", st.p95},
                                {"p99", st.p99}};
}

WindowStats stats_from_json(const nlohmann::json& j, const std::string& ctx) {
  WindowStats st;
  for (const char* key : {"avg", "median", "p90", "p95", "p99"})
    if (!j.contains(key) || !j.at(key).is_number())
      throw ParseError(ctx + ": missing or non-numeric field '" + key + "'");
  st.avg = j.at("avg").get<double>();
  st.median = j.at("median").get<double>();
  st.p90 = j.at("p90").get<double>();
  st.p95 = j.at("p95").get<double>();
  st.p99 = j.at("p99").get<double>();
  return st;
}

}  // namespace

std::string ground_truth_to_json_text(const GroundTruth& gt) {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (const auto& [flow_id, cells] : gt.flows) {
    nlohmann::ordered_json windows = nlohmann::ordered_json::object();
    for (std::size_t w = 0; w < cells.size(); ++w) {
      const FlowWindowTruth& c = cells[w];
      nlohmann::ordered_json cell{{"packet_count", c.packet_count},
                                  {"drop_count", c.drop_count}};
      if (c.delay) cell["delay"] = stats_to_json(*c.delay);
      if (c.jitter) cell["jitter"] = stats_to_json(*c.jitter);
      windows[std::to_string(w)] = std::move(cell);
    }
    root[std::to_string(flow_id)] = std::move(windows);
  }
  return root.dump(2) + "\n";
}

GroundTruth ground_truth_from_json_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ground truth is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("ground truth root must be a JSON object");
  GroundTruth gt;
  int max_windows = 0;
  for (const auto& [flow_key, windows] : root.items()) {
    int flow_id = 0;
    try {
      flow_id = std::stoi(flow_key);
    } catch (const std::exception&) {
      throw ParseError("ground truth flow key is not an integer: '" + flow_key + "'");
    }
    if (!windows.is_object())
      throw ParseError("ground truth entry for flow " + flow_key + " must be an object");
    std::map<int, FlowWindowTruth> cells;
    for (const auto& [w_key, cell] : windows.items()) {
      int w = 0;
      try {
        w = std::stoi(w_key);
      } catch (const std::exception&) {
        throw ParseError("ground truth window key is not an integer: '" + w_key + "'");
      }
      if (w < 0) throw ParseError("negative window index " + w_key);
      const std::string ctx = "flow " + flow_key + " window " + w_key;
      FlowWindowTruth t;
      if (!cell.is_object()) throw ParseError(ctx + ": cell must be an object");
      if (!cell.contains("packet_count") || !cell.at("packet_count").is_number_integer())
        throw ParseError(ctx + ": missing integer field 'packet_count'");
      if (!cell.contains("drop_count") || !cell.at("drop_count").is_number_integer())
        throw ParseError(ctx + ": missing integer field 'drop_count'");
      t.packet_count = cell.at("packet_count").get<std::int64_t>();
      t.drop_count = cell.at("drop_count").get<std::int64_t>();
      if (cell.contains("delay")) t.delay = stats_from_json(cell.at("delay"), ctx + " delay");
      if (cell.contains("jitter")) t.jitter = stats_from_json(cell.at("jitter"), ctx + " jitter");
      cells[w] = t;
      max_windows = std::max(max_windows, w + 1);
    }
    auto& vec = gt.flows[flow_id];
    if (!cells.empty()) {
      vec.resize(cells.rbegin()->first + 1);
      for (auto& [w, t] : cells) vec[w] = t;
    }
  }
  gt.windows = max_windows;
  for (auto& [flow_id, vec] : gt.flows) vec.resize(gt.windows);
  return gt;
}

void save_ground_truth(const std::string& path, const GroundTruth& gt) {
  write_text_file_atomic(path, ground_truth_to_json_text(gt));
}

GroundTruth load_ground_truth(const std::string& path) {
  try {
    return ground_truth_from_json_text(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string packets_to_csv(const std::vector<PacketRecord>& packets) {
  std::ostringstream out;
  out << "flow,seq,gen_time,delivery_time,dropped\n";
  out << std::setprecision(17);
  for (const PacketRecord& p : packets) {
    out << p.flow << ',' << p.seq << ',' << p.gen_time << ',';
    if (!p.dropped) out << p.delivery_time;
    out << ',' << (p.dropped ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace flowcast
