#pragma once

// Flat finite state machines with one optional level of superstate grouping:
// the import format, the reference interpreter and the compiler to an S model.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

struct FsmState {
  std::string name;
  std::optional<std::string> parent;  // superstate group, metadata only
  std::string label;                  // display name; defaults to lowercase name

  friend bool operator==(const FsmState&, const FsmState&) = default;
};

struct FsmTransition {
  std::string from;
  std::string event;
  std::string to;

  friend bool operator==(const FsmTransition&, const FsmTransition&) = default;
};

struct FsmSpec {
  std::string name = "System";         // root thimac of the compiled model
  std::string label;                   // root thimac label; defaults to name
  std::string controller = "Controller";
  std::string condition = "Active";    // condition thimac label, "Driving in ..."
  std::vector<FsmState> states;
  std::string initial;
  std::vector<FsmTransition> transitions;

  const FsmState* find(std::string_view state) const;
  friend bool operator==(const FsmSpec&, const FsmSpec&) = default;
};

/// Throws InvalidFsm, UnknownState, AmbiguousTransition or DuplicateTransition.
void validate_fsm(const FsmSpec& spec);

/// Reads a `.fsm.json` document and validates it.
FsmSpec load_fsm_json(std::string_view text);
std::string to_fsm_json(const FsmSpec& spec);

/// Target of the transition (current, event), or nullopt when the event is
/// not enabled in `current`. Throws UnknownState for an unknown `current`.
std::optional<std::string> fsm_step(const FsmSpec& spec,
                                    std::string_view current,
                                    std::string_view event);

struct FsmStep {
  std::string event;
  std::string state;  // state after the step
  bool enabled = false;

  friend bool operator==(const FsmStep&, const FsmStep&) = default;
};

struct FsmRun {
  std::string current;
  std::vector<FsmStep> history;

  /// Initial state followed by the target of each enabled step.
  std::vector<std::string> state_sequence(std::string_view initial) const;
};

FsmRun fsm_run(const FsmSpec& spec, std::span<const std::string> script);

/// Events in first-use order.
std::vector<std::string> fsm_events(const FsmSpec& spec);

/// Builds the S model of a state machine:
///   - the root thimac creates a start signal that the controller receives
///     and processes, triggering the initial state;
///   - every state thimac sits under the controller (inside its superstate
///     group when it has one);
///   - each transition (s, e, t) gets a stimulus thimac under `Driver` that
///     creates e and sends it into s, where it is processed and released to t;
///   - every non-initial state with incoming transitions processes its
///     arrivals in one stage that triggers a condition thimac.
/// Throws like validate_fsm, plus SelfLoop for a transition (s, e, s).
SModel compile_fsm_to_s(const FsmSpec& spec);

}  // namespace tmkit
