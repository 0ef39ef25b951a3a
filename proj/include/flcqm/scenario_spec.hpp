#pragma once

// Scenario description shared by the simulator, the config parser and the
// CLI: nodes, static routes, MAC parameters, timeline and run options.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flcqm/fuzzy.hpp"
#include "flcqm/qos.hpp"

namespace flcqm {

using SimTime = std::int64_t;  // integer nanoseconds since run start

constexpr SimTime kNsPerSec = 1'000'000'000;

inline SimTime to_sim_time(double seconds) {
  return static_cast<SimTime>(seconds * 1e9 + 0.5);
}

inline double to_seconds(SimTime t) { return static_cast<double>(t) * 1e-9; }

enum class NodeKind { source, intermediate, actuator, interferer };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::source: return "source";
    case NodeKind::intermediate: return "intermediate";
    case NodeKind::actuator: return "actuator";
    case NodeKind::interferer: return "interferer";
  }
  return "?";
}

struct NodeSpec {
  int id = 0;
  std::string name;
  NodeKind kind = NodeKind::source;
  double period = 0.010;     // s; fixed period for interferers
  bool start_active = true;
};

// Ordered hop list, source first, terminal actuator last.
struct Route {
  std::vector<int> hops;
};

struct MacConfig {
  std::int64_t data_rate_bps = 250'000;
  int min_be = 3;
  int max_be = 5;
  int max_csma_backoffs = 4;
  SimTime unit_backoff = 320'000;  // 0.32 ms
  SimTime cca_duration = 128'000;  // 0.128 ms
  int queue_capacity = 10;
};

struct TimelineEvent {
  double time = 0.0;  // s
  int node = 0;
  bool activate = true;
};

enum class Scheme { fixed, flc };

inline const char* to_string(Scheme s) {
  return s == Scheme::fixed ? "fixed" : "flc";
}

struct ScenarioSpec {
  std::vector<NodeSpec> nodes;
  std::map<int, Route> routes;  // keyed by source/interferer node id
  MacConfig mac;
  std::vector<TimelineEvent> timeline;
  Scheme scheme = Scheme::fixed;
  QosConfig qos;
  std::shared_ptr<const FuzzyController> controller;  // null -> default
  std::uint64_t seed = 1;
  double end_time = 80.0;  // s
  int packet_size_bytes = 45;
  bool inband_feedback = false;

  const NodeSpec* find_node(int id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }

  const NodeSpec* find_node(const std::string& name) const {
    for (const auto& n : nodes)
      if (n.name == name) return &n;
    return nullptr;
  }
};

class ScenarioValidationError : public std::invalid_argument {
 public:
  explicit ScenarioValidationError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

inline void validate_scenario(const ScenarioSpec& spec) {
  if (spec.nodes.empty() && !spec.timeline.empty())
    throw ScenarioValidationError("timeline present but no nodes");
  for (const auto& n : spec.nodes) {
    for (const auto& m : spec.nodes)
      if (&n != &m && n.id == m.id)
        throw ScenarioValidationError("duplicate node id " +
                                      std::to_string(n.id));
    if (n.kind == NodeKind::source || n.kind == NodeKind::interferer) {
      auto it = spec.routes.find(n.id);
      if (it == spec.routes.end())
        throw ScenarioValidationError("node " + n.name + " has no route");
    }
  }
  for (const auto& [id, route] : spec.routes) {
    if (route.hops.size() < 2)
      throw ScenarioValidationError("route for node " + std::to_string(id) +
                                    " needs at least source and actuator");
    if (route.hops.front() != id)
      throw ScenarioValidationError("route for node " + std::to_string(id) +
                                    " must start at the node itself");
    for (std::size_t i = 0; i < route.hops.size(); ++i) {
      const NodeSpec* n = spec.find_node(route.hops[i]);
      if (!n)
        throw ScenarioValidationError("route hop refers to unknown node " +
                                      std::to_string(route.hops[i]));
      if (i + 1 == route.hops.size() && n->kind != NodeKind::actuator)
        throw ScenarioValidationError("route for node " + std::to_string(id) +
                                      " must end at an actuator");
      for (std::size_t j = i + 1; j < route.hops.size(); ++j)
        if (route.hops[i] == route.hops[j])
          throw ScenarioValidationError("route for node " +
                                        std::to_string(id) +
                                        " repeats a node");
    }
  }
  if (!(spec.mac.min_be <= spec.mac.max_be))
    throw ScenarioValidationError("mac: min_be must be <= max_be");
  if (spec.mac.unit_backoff <= 0 || spec.mac.cca_duration <= 0 ||
      spec.mac.data_rate_bps <= 0)
    throw ScenarioValidationError("mac: durations and data rate must be > 0");
  if (spec.mac.queue_capacity < 1)
    throw ScenarioValidationError("mac: queue capacity must be >= 1");
  for (const auto& ev : spec.timeline) {
    if (ev.time < 0.0 || ev.time > spec.end_time)
      throw ScenarioValidationError("timeline event outside [0, end_time]");
    if (!spec.find_node(ev.node))
      throw ScenarioValidationError("timeline event for unknown node " +
                                    std::to_string(ev.node));
  }
  // Triggers the QosConfig invariant checks.
  initial_state(spec.qos);
}

}  // namespace flcqm
