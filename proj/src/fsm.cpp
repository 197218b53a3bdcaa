#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "tmkit/error.hpp"
#include "tmkit/fsm.hpp"

namespace tmkit {

using nlohmann::json;

const FsmState* FsmSpec::find(std::string_view state) const {
  auto it = std::ranges::find(states, state, &FsmState::name);
  return it == states.end() ? nullptr : &*it;
}

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidFsm, message);
}

void require_identifier(std::string_view text, std::string_view what) {
  if (!is_identifier(text)) {
    invalid(std::string(what) + " '" + std::string(text) +
            "' is not an identifier");
  }
}

}  // namespace

void validate_fsm(const FsmSpec& spec) {
  require_identifier(spec.name, "machine name");
  require_identifier(spec.controller, "controller name");
  if (spec.controller == "Driver" || spec.controller == "Conditions") {
    invalid("controller name '" + spec.controller + "' is reserved");
  }
  if (spec.states.empty()) invalid("a state machine needs at least one state");

  std::set<std::string_view> names;
  for (const FsmState& state : spec.states) {
    require_identifier(state.name, "state name");
    if (!names.insert(state.name).second) {
      invalid("duplicate state '" + state.name + "'");
    }
  }
  for (const FsmState& state : spec.states) {
    if (!state.parent) continue;
    require_identifier(*state.parent, "superstate name");
    if (*state.parent == state.name) {
      invalid("state '" + state.name + "' cannot be its own superstate");
    }
    if (const FsmState* parent = spec.find(*state.parent);
        parent && parent->parent) {
      invalid("superstates nest at most two levels deep ('" + state.name +
              "' -> '" + *state.parent + "' -> '" + *parent->parent + "')");
    }
  }
  if (!spec.find(spec.initial)) {
    throw Error(ErrorCode::UnknownState,
                "initial state '" + spec.initial + "' is not declared");
  }

  std::map<std::pair<std::string_view, std::string_view>, std::string_view>
      targets;
  for (const FsmTransition& t : spec.transitions) {
    for (const std::string* end : {&t.from, &t.to}) {
      if (!spec.find(*end)) {
        throw Error(ErrorCode::UnknownState,
                    "transition " + t.from + " --" + t.event + "--> " + t.to +
                        " names unknown state '" + *end + "'");
      }
    }
    require_identifier(t.event, "event name");
    auto [it, inserted] = targets.emplace(
        std::pair<std::string_view, std::string_view>(t.from, t.event), t.to);
    if (!inserted) {
      if (it->second == t.to) {
        throw Error(ErrorCode::DuplicateTransition,
                    "duplicate transition " + t.from + " --" + t.event +
                        "--> " + t.to);
      }
      throw Error(ErrorCode::AmbiguousTransition,
                  "event '" + t.event + "' in state '" + t.from +
                      "' leads to both '" + std::string(it->second) +
                      "' and '" + t.to + "'");
    }
  }
}

FsmSpec load_fsm_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) invalid("top level must be a JSON object");

  auto string_at = [](const json& obj, const char* key,
                      std::string_view where) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end()) {
      invalid(std::string(where) + " is missing key \"" + key + "\"");
    }
    if (!it->is_string()) {
      invalid(std::string(where) + " key \"" + key + "\" must be a string");
    }
    return it->get<std::string>();
  };
  auto optional_string = [&](const json& obj, const char* key,
                             std::string_view where)
      -> std::optional<std::string> {
    if (!obj.contains(key)) return std::nullopt;
    return string_at(obj, key, where);
  };
  auto array_at = [](const json& obj, const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end()) invalid(std::string("missing key \"") + key + "\"");
    if (!it->is_array()) invalid(std::string("\"") + key + "\" must be an array");
    return *it;
  };

  FsmSpec spec;
  const json& states = array_at(doc, "states");
  const json& transitions = array_at(doc, "transitions");
  spec.initial = string_at(doc, "initial", "document");
  if (auto v = optional_string(doc, "name", "document")) spec.name = *v;
  if (auto v = optional_string(doc, "label", "document")) spec.label = *v;
  if (auto v = optional_string(doc, "controller", "document")) spec.controller = *v;
  if (auto v = optional_string(doc, "condition", "document")) spec.condition = *v;

  for (const json& entry : states) {
    if (!entry.is_object()) invalid("each state must be an object");
    FsmState state;
    state.name = string_at(entry, "name", "state");
    state.parent = optional_string(entry, "parent", "state " + state.name);
    if (auto v = optional_string(entry, "label", "state " + state.name)) {
      state.label = *v;
    }
    spec.states.push_back(std::move(state));
  }
  for (const json& entry : transitions) {
    if (!entry.is_object()) invalid("each transition must be an object");
    spec.transitions.push_back({string_at(entry, "from", "transition"),
                                string_at(entry, "event", "transition"),
                                string_at(entry, "to", "transition")});
  }
  validate_fsm(spec);
  return spec;
}

std::string to_fsm_json(const FsmSpec& spec) {
  json doc = json::object();
  doc["name"] = spec.name;
  if (!spec.label.empty()) doc["label"] = spec.label;
  doc["controller"] = spec.controller;
  doc["condition"] = spec.condition;
  doc["states"] = json::array();
  for (const FsmState& state : spec.states) {
    json entry = {{"name", state.name}};
    if (state.parent) entry["parent"] = *state.parent;
    if (!state.label.empty()) entry["label"] = state.label;
    doc["states"].push_back(std::move(entry));
  }
  doc["initial"] = spec.initial;
  doc["transitions"] = json::array();
  for (const FsmTransition& t : spec.transitions) {
    doc["transitions"].push_back({{"from", t.from}, {"event", t.event}, {"to", t.to}});
  }
  return doc.dump(2) + "\n";
}

std::optional<std::string> fsm_step(const FsmSpec& spec,
                                    std::string_view current,
                                    std::string_view event) {
  if (!spec.find(current)) {
    throw Error(ErrorCode::UnknownState,
                "unknown state '" + std::string(current) + "'");
  }
  for (const FsmTransition& t : spec.transitions) {
    if (t.from == current && t.event == event) return t.to;
  }
  return std::nullopt;
}

std::vector<std::string> FsmRun::state_sequence(std::string_view initial) const {
  std::vector<std::string> out{std::string(initial)};
  for (const FsmStep& step : history) {
    if (step.enabled) out.push_back(step.state);
  }
  return out;
}

FsmRun fsm_run(const FsmSpec& spec, std::span<const std::string> script) {
  FsmRun run;
  run.current = spec.initial;
  for (const std::string& event : script) {
    auto next = fsm_step(spec, run.current, event);
    if (next) run.current = *next;
    run.history.push_back({event, run.current, next.has_value()});
  }
  return run;
}

std::vector<std::string> fsm_events(const FsmSpec& spec) {
  std::vector<std::string> events;
  for (const FsmTransition& t : spec.transitions) {
    if (std::ranges::find(events, t.event) == events.end()) {
      events.push_back(t.event);
    }
  }
  return events;
}

}  // namespace tmkit
