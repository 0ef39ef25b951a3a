#pragma once

// Line-oriented scenario config: [section] headers, key = value pairs,
// '#' comments. Unknown sections and keys are rejected. The bundled
// scenarios/paper.scenario file is the normative example of the format.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flcqm/scenario.hpp"

namespace flcqm {

class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(int line, const std::string& msg)
      : std::runtime_error("config line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ConfigValidationError : public std::runtime_error {
 public:
  explicit ConfigValidationError(const std::string& msg)
      : std::runtime_error("config: " + msg) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

inline double parse_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError(line, "expected a number, got '" + s + "'");
  }
}

inline std::int64_t parse_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError(line, "expected an integer, got '" + s + "'");
  }
}

struct SetOverride {
  std::optional<UniverseInterval> universe;
  std::vector<FuzzySet> sets;
};

}  // namespace detail

inline ScenarioSpec parse_config_text(std::istream& in) {
  ScenarioSpec spec;
  spec.nodes.clear();
  std::string section;
  std::string raw;
  int lineno = 0;
  int next_node_id = 1;
  std::map<std::string, int> name_to_id;
  std::vector<std::pair<int, std::pair<std::string, std::string>>> route_lines;
  std::vector<std::pair<int, std::string>> timeline_lines;
  std::optional<RuleBase> rules_override;
  std::map<std::string, detail::SetOverride> set_overrides;
  int defuzz_resolution = FuzzyController::kDefaultResolution;
  bool controller_overridden = false;

  auto kv = [&](const std::string& body) -> std::pair<std::string, std::string> {
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError(lineno, "expected 'key = value'");
    return {detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1))};
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigParseError(lineno, "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "mac" && section != "controller" &&
          section != "nodes" && section != "routes" &&
          section != "timeline" && section != "controller.rules" &&
          section != "controller.sets.e" && section != "controller.sets.de" &&
          section != "controller.sets.dh")
        throw ConfigParseError(lineno, "unknown section [" + section + "]");
      continue;
    }
    if (section.empty())
      throw ConfigParseError(lineno, "content before any [section] header");

    if (section == "run") {
      auto [key, value] = kv(line);
      if (key == "scheme") {
        if (value == "fixed") spec.scheme = Scheme::fixed;
        else if (value == "flc") spec.scheme = Scheme::flc;
        else throw ConfigParseError(lineno, "scheme must be fixed or flc");
      } else if (key == "seed") {
        spec.seed = static_cast<std::uint64_t>(detail::parse_int(value, lineno));
      } else if (key == "end_time") {
        spec.end_time = detail::parse_double(value, lineno);
      } else if (key == "feedback") {
        if (value == "outofband") spec.inband_feedback = false;
        else if (value == "inband") spec.inband_feedback = true;
        else throw ConfigParseError(lineno, "feedback must be outofband or inband");
      } else if (key == "packet_size_bytes") {
        spec.packet_size_bytes = static_cast<int>(detail::parse_int(value, lineno));
      } else {
        throw ConfigParseError(lineno, "unknown key '" + key + "' in [run]");
      }
    } else if (section == "mac") {
      auto [key, value] = kv(line);
      if (key == "data_rate_bps")
        spec.mac.data_rate_bps = detail::parse_int(value, lineno);
      else if (key == "min_be")
        spec.mac.min_be = static_cast<int>(detail::parse_int(value, lineno));
      else if (key == "max_be")
        spec.mac.max_be = static_cast<int>(detail::parse_int(value, lineno));
      else if (key == "max_csma_backoffs")
        spec.mac.max_csma_backoffs =
            static_cast<int>(detail::parse_int(value, lineno));
      else if (key == "unit_backoff_ms")
        spec.mac.unit_backoff =
            to_sim_time(detail::parse_double(value, lineno) * 1e-3);
      else if (key == "cca_ms")
        spec.mac.cca_duration =
            to_sim_time(detail::parse_double(value, lineno) * 1e-3);
      else if (key == "queue_capacity")
        spec.mac.queue_capacity =
            static_cast<int>(detail::parse_int(value, lineno));
      else
        throw ConfigParseError(lineno, "unknown key '" + key + "' in [mac]");
    } else if (section == "controller") {
      auto [key, value] = kv(line);
      if (key == "dmr_setpoint")
        spec.qos.dmr_setpoint = detail::parse_double(value, lineno);
      else if (key == "t_flc")
        spec.qos.t_flc = detail::parse_double(value, lineno);
      else if (key == "h_default_ms")
        spec.qos.h_initial = detail::parse_double(value, lineno) * 1e-3;
      else if (key == "h_min_ms")
        spec.qos.h_min = detail::parse_double(value, lineno) * 1e-3;
      else if (key == "h_max_ms")
        spec.qos.h_max = detail::parse_double(value, lineno) * 1e-3;
      else if (key == "defuzz_resolution") {
        defuzz_resolution = static_cast<int>(detail::parse_int(value, lineno));
        controller_overridden = true;
      } else
        throw ConfigParseError(lineno,
                               "unknown key '" + key + "' in [controller]");
    } else if (section == "nodes") {
      auto [name, value] = kv(line);
      if (name_to_id.count(name))
        throw ConfigParseError(lineno, "duplicate node '" + name + "'");
      const auto toks = detail::split_ws(value);
      if (toks.empty())
        throw ConfigParseError(lineno, "node needs a kind");
      NodeSpec n;
      n.id = next_node_id++;
      n.name = name;
      if (toks[0] == "source") n.kind = NodeKind::source;
      else if (toks[0] == "intermediate") n.kind = NodeKind::intermediate;
      else if (toks[0] == "actuator") n.kind = NodeKind::actuator;
      else if (toks[0] == "interferer") n.kind = NodeKind::interferer;
      else throw ConfigParseError(lineno, "unknown node kind '" + toks[0] + "'");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (toks[i] == "off") {
          n.start_active = false;
        } else if (toks[i].rfind("period_ms=", 0) == 0) {
          n.period = detail::parse_double(toks[i].substr(10), lineno) * 1e-3;
        } else {
          throw ConfigParseError(lineno, "unknown node option '" + toks[i] + "'");
        }
      }
      name_to_id[name] = n.id;
      spec.nodes.push_back(n);
    } else if (section == "routes") {
      auto [name, value] = kv(line);
      route_lines.push_back({lineno, {name, value}});
    } else if (section == "timeline") {
      timeline_lines.push_back({lineno, line});
    } else if (section == "controller.rules") {
      // "E_LABEL DE_LABEL = DH_LABEL"
      auto [ante, cons] = kv(line);
      const auto toks = detail::split_ws(ante);
      if (toks.size() != 2)
        throw ConfigParseError(lineno, "rule antecedent needs two labels");
      if (!rules_override) rules_override.emplace();
      rules_override->rules.push_back({toks[0], toks[1], detail::trim(cons)});
      controller_overridden = true;
    } else {  // controller.sets.{e,de,dh}
      const std::string which = section.substr(std::string("controller.sets.").size());
      auto [key, value] = kv(line);
      auto& ov = set_overrides[which];
      const auto toks = detail::split_ws(value);
      if (key == "universe") {
        if (toks.size() != 2)
          throw ConfigParseError(lineno, "universe needs 'lo hi'");
        ov.universe = UniverseInterval{detail::parse_double(toks[0], lineno),
                                       detail::parse_double(toks[1], lineno)};
      } else {
        if (toks.size() != 3 && toks.size() != 4)
          throw ConfigParseError(
              lineno, "set needs 'left_foot peak right_foot [shoulder]'");
        FuzzySet s;
        s.label = key;
        s.left_foot = detail::parse_double(toks[0], lineno);
        s.peak = detail::parse_double(toks[1], lineno);
        s.right_foot = detail::parse_double(toks[2], lineno);
        if (toks.size() == 4) {
          if (toks[3] == "leftshoulder") s.left_shoulder = true;
          else if (toks[3] == "rightshoulder") s.right_shoulder = true;
          else throw ConfigParseError(lineno, "unknown shoulder flag '" + toks[3] + "'");
        }
        ov.sets.push_back(s);
      }
      controller_overridden = true;
    }
  }

  // Resolve routes now that all node names are known.
  for (const auto& [ln, entry] : route_lines) {
    const auto& [name, value] = entry;
    auto it = name_to_id.find(name);
    if (it == name_to_id.end())
      throw ConfigParseError(ln, "route for unknown node '" + name + "'");
    Route route;
    route.hops.push_back(it->second);
    for (const auto& hop : detail::split_ws(value)) {
      auto hit = name_to_id.find(hop);
      if (hit == name_to_id.end())
        throw ConfigParseError(ln, "route hop refers to unknown node '" + hop + "'");
      route.hops.push_back(hit->second);
    }
    spec.routes[it->second] = route;
  }
  for (const auto& [ln, line] : timeline_lines) {
    const auto toks = detail::split_ws(line);
    if (toks.size() != 3)
      throw ConfigParseError(ln, "timeline entry needs 'time node action'");
    TimelineEvent ev;
    ev.time = detail::parse_double(toks[0], ln);
    auto it = name_to_id.find(toks[1]);
    if (it == name_to_id.end())
      throw ConfigParseError(ln, "timeline entry for unknown node '" + toks[1] + "'");
    ev.node = it->second;
    if (toks[2] == "activate") ev.activate = true;
    else if (toks[2] == "deactivate") ev.activate = false;
    else throw ConfigParseError(ln, "action must be activate or deactivate");
    spec.timeline.push_back(ev);
  }

  if (controller_overridden) {
    auto build_var = [&](const std::string& which,
                         LinguisticVariable def) -> LinguisticVariable {
      auto it = set_overrides.find(which);
      if (it == set_overrides.end()) return def;
      LinguisticVariable var = def;
      if (it->second.universe) var.universe = *it->second.universe;
      if (!it->second.sets.empty()) var.sets = it->second.sets;
      return var;
    };
    try {
      auto controller = std::make_shared<const FuzzyController>(
          build_var("e", default_e_variable()),
          build_var("de", default_de_variable()),
          build_var("dh", default_dh_variable()),
          rules_override ? *rules_override : default_rule_base(),
          defuzz_resolution);
      spec.controller = controller;
    } catch (const FuzzyValidationError& e) {
      throw ConfigValidationError(e.what());
    }
  }

  try {
    validate_scenario(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(e.what());
  }
  return spec;
}

inline ScenarioSpec parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigValidationError("cannot open config file: " + path);
  return parse_config_text(in);
}

}  // namespace flcqm
