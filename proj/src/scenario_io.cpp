// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "flowcast/error.hpp"
#include "flowcast/io_util.hpp"
#include "flowcast/scenario.hpp"

namespace flowcast {

using nlohmann::json;

namespace {

double get_number(const json& j, const char* field, const std::string& ctx) {
  auto it = j.find(field);
  if (it == j.end()) throw ParseError(ctx + ": missing field \"" + field + "\"");
  if (!it->is_number()) throw ParseError(ctx + ": field \"" + field + "\" must be a number");
  return it->get<double>();
}

int get_int(const json& j, const char* field, const std::string& ctx) {
  auto it = j.find(field);
  if (it == j.end()) throw ParseError(ctx + ": missing field \"" + field + "\"");
  if (!it->is_number_integer()) throw ParseError(ctx + ": field \"" + field + "\" must be an integer");
  return it->get<int>();
}

std::string get_string(const json& j, const char* field, const std::string& ctx) {
  auto it = j.find(field);
  if (it == j.end()) throw ParseError(ctx + ": missing field \"" + field + "\"");
  if (!it->is_string()) throw ParseError(ctx + ": field \"" + field + "\" must be a string");
  return it->get<std::string>();
}

const json& get_array(const json& j, const char* field, const std::string& ctx) {
  auto it = j.find(field);
  if (it == j.end()) throw ParseError(ctx + ": missing field \"" + field + "\"");
  if (!it->is_array()) throw ParseError(ctx + ": field \"" + field + "\" must be an array");
  return *it;
}

ConstantBurst burst_from_json(const json& j, const std::string& ctx) {
  ConstantBurst b;
  b.rate = get_number(j, "rate", ctx);
  b.burst_duration = get_number(j, "burst_duration", ctx);
  b.period = get_number(j, "period", ctx);
  b.start = get_number(j, "start", ctx);
  b.stop = get_number(j, "stop", ctx);
  return b;
}

json burst_to_json(const ConstantBurst& b) {
  return json{{"rate", b.rate},
              {"burst_duration", b.burst_duration},
              {"period", b.period},
              {"start", b.start},
              {"stop", b.stop}};
}

TrafficProfile profile_from_json(const json& j, const std::string& ctx) {
  const std::string type = get_string(j, "type", ctx);
  if (type == "constant_burst") return burst_from_json(j, ctx);
  if (type == "multi_burst") {
    MultiBurst mb;
    const json& comps = get_array(j, "components", ctx);
    for (size_t i = 0; i < comps.size(); ++i)
      mb.components.push_back(burst_from_json(comps[i], ctx + ".components[" + std::to_string(i) + "]"));
    return mb;
  }
  if (type == "trace_replay") {
    TraceReplay tr;
    const json& ts = get_array(j, "timestamps", ctx);
    for (const auto& t : ts) {
      if (!t.is_number()) throw ParseError(ctx + ": timestamps must be numbers");
      tr.timestamps.push_back(t.get<double>());
    }
    return tr;
  }
  throw ParseError(ctx + ": unknown profile type \"" + type + "\"");
}

json profile_to_json(const TrafficProfile& p) {
  if (const auto* cb = std::get_if<ConstantBurst>(&p)) {
    json j = burst_to_json(*cb);
    j["type"] = "constant_burst";
    return j;
  }
  if (const auto* mb = std::get_if<MultiBurst>(&p)) {
    json comps = json::array();
    for (const auto& c : mb->components) comps.push_back(burst_to_json(c));
    return json{{"type", "multi_burst"}, {"components", comps}};
  }
  return json{{"type", "trace_replay"},
              {"timestamps", std::get<TraceReplay>(p).timestamps}};
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("scenario file must contain a JSON object");
  Scenario s;
  for (size_t i = 0; i < get_array(j, "devices", "scenario").size(); ++i) {
    const json& d = j["devices"][i];
    const std::string ctx = "devices[" + std::to_string(i) + "]";
    Device dev;
    dev.id = get_int(d, "id", ctx);
    dev.kind = device_kind_from_string(get_string(d, "kind", ctx));
    s.devices.push_back(dev);
  }
  for (size_t i = 0; i < get_array(j, "links", "scenario").size(); ++i) {
    const json& l = j["links"][i];
    const std::string ctx = "links[" + std::to_string(i) + "]";
    Link link;
    link.id = get_int(l, "id", ctx);
    link.src_device = get_int(l, "src_device", ctx);
    link.dst_device = get_int(l, "dst_device", ctx);
    link.bandwidth = get_number(l, "bandwidth", ctx);
    link.propagation_delay = get_number(l, "propagation_delay", ctx);
    s.links.push_back(link);
  }
  for (size_t i = 0; i < get_array(j, "queues", "scenario").size(); ++i) {
    const json& q = j["queues"][i];
    const std::string ctx = "queues[" + std::to_string(i) + "]";
    Queue queue;
    queue.id = get_int(q, "id", ctx);
    queue.device = get_int(q, "device", ctx);
    queue.out_link = get_int(q, "out_link", ctx);
    queue.buffer_size = get_int(q, "buffer_size", ctx);
    s.queues.push_back(queue);
  }
  for (size_t i = 0; i < get_array(j, "flows", "scenario").size(); ++i) {
    const json& f = j["flows"][i];
    const std::string ctx = "flows[" + std::to_string(i) + "]";
    Flow flow;
    flow.id = get_int(f, "id", ctx);
    flow.src_device = get_int(f, "src_device", ctx);
    flow.dst_device = get_int(f, "dst_device", ctx);
    flow.packet_size = get_number(f, "packet_size", ctx);
    const json& path = get_array(f, "path", ctx);
    for (size_t h = 0; h < path.size(); ++h) {
      const std::string hctx = ctx + ".path[" + std::to_string(h) + "]";
      Hop hop;
      hop.link = get_int(path[h], "link", hctx);
      hop.queue = get_int(path[h], "queue", hctx);
      flow.path.push_back(hop);
    }
    auto pit = f.find("profile");
    if (pit == f.end()) throw ParseError(ctx + ": missing field \"profile\"");
    flow.profile = profile_from_json(*pit, ctx + ".profile");
    s.flows.push_back(flow);
  }
  s.duration_s = get_number(j, "duration_s", "scenario");
  s.window_s = get_number(j, "window_s", "scenario");
  return s;
}

json scenario_to_json(const Scenario& s) {
  json devices = json::array();
  for (const Device& d : s.devices)
    devices.push_back({{"id", d.id}, {"kind", to_string(d.kind)}});
  json links = json::array();
  for (const Link& l : s.links)
    links.push_back({{"id", l.id},
                     {"src_device", l.src_device},
                     {"dst_device", l.dst_device},
                     {"bandwidth", l.bandwidth},
                     {"propagation_delay", l.propagation_delay}});
  json queues = json::array();
  for (const Queue& q : s.queues)
    queues.push_back({{"id", q.id},
                      {"device", q.device},
                      {"out_link", q.out_link},
                      {"buffer_size", q.buffer_size}});
  json flows = json::array();
  for (const Flow& f : s.flows) {
    json path = json::array();
    for (const Hop& h : f.path) path.push_back({{"link", h.link}, {"queue", h.queue}});
    flows.push_back({{"id", f.id},
                     {"src_device", f.src_device},
                     {"dst_device", f.dst_device},
                     {"path", path},
                     {"packet_size", f.packet_size},
                     {"profile", profile_to_json(f.profile)}});
  }
  return json{{"devices", devices}, {"links", links},   {"queues", queues},
              {"flows", flows},     {"duration_s", s.duration_s}, {"window_s", s.window_s}};
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario parse error: ") + e.what());
  }
  Scenario s = scenario_from_json(j);
  validate(s);
  return s;
}

std::string scenario_to_json_text(const Scenario& s) {
  return scenario_to_json(s).dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return scenario_from_json_text(ss.str());
  } catch (ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void save_scenario(const Scenario& s, const std::string& path) {
  write_text_file_atomic(path, scenario_to_json_text(s));
}

}  // namespace flowcast
