#include <algorithm>
#include <cctype>
#include <map>

#include "tmkit/error.hpp"
#include "tmkit/fsm.hpp"

namespace tmkit {

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Appends stages to a thimac while tracking the ordinal build_model will
// assign, so arcs can name stages before the model exists.
class StageWriter {
 public:
  explicit StageWriter(Thimac& thimac) : thimac_(thimac) {}

  std::string add(StageKind kind) {
    std::string id = stage_ref(thimac_.id, kind, counts_[kind]++);
    thimac_.stages.push_back({id, kind, thimac_.id, false});
    return id;
  }

 private:
  Thimac& thimac_;
  std::map<StageKind, std::size_t> counts_;
};

class Compiler {
 public:
  explicit Compiler(const FsmSpec& spec) : spec_(spec) {}

  SModel run() {
    Thimac root{spec_.name, spec_.label.empty() ? spec_.name : spec_.label,
                {}, {}, std::nullopt};
    Thimac controller{child_id(root.id, spec_.controller), spec_.controller,
                      {}, {}, std::nullopt};

    StageWriter root_stages(root);
    std::string start = chain(root_stages, {StageKind::create, StageKind::release,
                                            StageKind::transfer_output});
    StageWriter controller_stages(controller);
    std::string signal_in = controller_stages.add(StageKind::transfer_input);
    std::string controller_process =
        chain_from(controller_stages, signal_in,
                   {StageKind::receive, StageKind::process});
    flows_.push_back({start, signal_in, "signal"});

    std::map<std::string, Thimac> state_thimacs;
    std::vector<std::string> out_entry(spec_.transitions.size());
    std::vector<std::string> out_exit(spec_.transitions.size());
    std::vector<std::string> in_entry(spec_.transitions.size());
    std::map<std::string, std::string> hub_of;

    for (const FsmState& state : spec_.states) {
      Thimac thimac{child_id(state_parent_id(controller.id, state), state.name),
                    state.label.empty() ? lowercase(state.name) : state.label,
                    {}, {}, std::nullopt};
      StageWriter stages(thimac);
      bool initial = state.name == spec_.initial;
      bool entered = std::ranges::any_of(
          spec_.transitions,
          [&](const FsmTransition& t) { return t.to == state.name; });
      if (initial) {
        std::string create = stages.add(StageKind::create);
        hub_of[state.name] = chain_from(stages, create, {StageKind::process});
        triggers_.push_back({controller_process, create});
      } else if (entered) {
        hub_of[state.name] = stages.add(StageKind::process);
      }
      for (std::size_t i = 0; i < spec_.transitions.size(); ++i) {
        if (spec_.transitions[i].from != state.name) continue;
        out_entry[i] = stages.add(StageKind::transfer_input);
        out_exit[i] = chain_from(stages, out_entry[i],
                                 {StageKind::receive, StageKind::process,
                                  StageKind::release, StageKind::transfer_output});
      }
      for (std::size_t i = 0; i < spec_.transitions.size(); ++i) {
        if (spec_.transitions[i].to != state.name) continue;
        in_entry[i] = stages.add(StageKind::transfer_input);
        std::string receive = chain_from(stages, in_entry[i], {StageKind::receive});
        flows_.push_back({receive, hub_of.at(state.name), std::nullopt});
      }
      state_thimacs.emplace(state.name, std::move(thimac));
    }

    Thimac driver{child_id(root.id, "Driver"), "driver", {}, {}, std::nullopt};
    for (std::size_t i = 0; i < spec_.transitions.size(); ++i) {
      const FsmTransition& t = spec_.transitions[i];
      if (t.from == t.to) {
        throw Error(ErrorCode::SelfLoop, "transition " + t.from + " --" +
                                             t.event + "--> " + t.to +
                                             " does not change state");
      }
      Thimac stimulus{child_id(driver.id, t.event + "_" + t.from), t.event, {},
                      {}, std::nullopt};
      StageWriter stages(stimulus);
      std::string sent = chain(stages, {StageKind::create, StageKind::release,
                                        StageKind::transfer_output});
      flows_.push_back({sent, out_entry[i], t.event});
      flows_.push_back({out_exit[i], in_entry[i], std::nullopt});
      driver.subthimacs.push_back(std::move(stimulus));
    }

    Thimac conditions{child_id(root.id, "Conditions"), "conditions", {}, {},
                      std::nullopt};
    for (const FsmState& state : spec_.states) {
      if (state.name == spec_.initial || !hub_of.contains(state.name)) continue;
      Thimac condition{child_id(conditions.id, state.name), spec_.condition, {},
                       {}, std::nullopt};
      StageWriter stages(condition);
      std::string create = stages.add(StageKind::create);
      chain_from(stages, create, {StageKind::process});
      triggers_.push_back({hub_of.at(state.name), create});
      conditions.subthimacs.push_back(std::move(condition));
    }

    place_states(controller, state_thimacs);
    root.subthimacs.push_back(std::move(controller));
    if (!driver.subthimacs.empty()) root.subthimacs.push_back(std::move(driver));
    if (!conditions.subthimacs.empty()) {
      root.subthimacs.push_back(std::move(conditions));
    }
    return build_model(spec_.name, std::move(root), std::move(flows_),
                       std::move(triggers_));
  }

 private:
  std::string state_parent_id(const std::string& controller,
                              const FsmState& state) const {
    return state.parent ? child_id(controller, *state.parent) : controller;
  }

  // Nests state thimacs under the controller: inside a parent state, inside a
  // plain superstate group, or directly.
  void place_states(Thimac& controller, std::map<std::string, Thimac>& built) {
    for (const FsmState& state : spec_.states) {
      if (!state.parent) continue;
      Thimac child = std::move(built.at(state.name));
      if (auto parent = built.find(*state.parent); parent != built.end()) {
        parent->second.subthimacs.push_back(std::move(child));
        continue;
      }
      auto group = std::ranges::find(groups_, *state.parent, &Thimac::label);
      if (group == groups_.end()) {
        groups_.push_back({child_id(controller.id, *state.parent), *state.parent,
                           {}, {}, std::nullopt});
        group = std::prev(groups_.end());
      }
      group->subthimacs.push_back(std::move(child));
    }
    // Top-level states and groups keep the order of their first mention.
    std::vector<std::string> placed;
    for (const FsmState& state : spec_.states) {
      const std::string& top = state.parent ? *state.parent : state.name;
      if (std::ranges::find(placed, top) != placed.end()) continue;
      placed.push_back(top);
      if (auto it = built.find(top); it != built.end()) {
        controller.subthimacs.push_back(std::move(it->second));
      } else {
        auto group = std::ranges::find(groups_, top, &Thimac::label);
        controller.subthimacs.push_back(std::move(*group));
      }
    }
  }

  std::string chain(StageWriter& stages, const std::vector<StageKind>& kinds) {
    std::string first = stages.add(kinds.front());
    return chain_from(stages, first, {kinds.begin() + 1, kinds.end()});
  }

  std::string chain_from(StageWriter& stages, std::string from,
                         const std::vector<StageKind>& kinds) {
    for (StageKind kind : kinds) {
      std::string next = stages.add(kind);
      flows_.push_back({std::move(from), next, std::nullopt});
      from = std::move(next);
    }
    return from;
  }

  const FsmSpec& spec_;
  std::vector<FlowArc> flows_;
  std::vector<TriggerArc> triggers_;
  std::vector<Thimac> groups_;
};

}  // namespace

SModel compile_fsm_to_s(const FsmSpec& spec) {
  validate_fsm(spec);
  return Compiler(spec).run();
}

}  // namespace tmkit
