#pragma once

// Events (static changes placed in time) and the deterministic simulator that
// produces the behavior model B from a stimulus script.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/statics.hpp"

namespace tmkit {

struct Event {
  std::string id;      // E1, E2, ...
  std::string change;  // static change id
  TimeTag time;
  std::string name;
  std::optional<std::string> caused_by;  // event id

  friend bool operator==(const Event&, const Event&) = default;
};

struct CatalogEntry {
  std::string change;
  ChangeKind kind = ChangeKind::statePath;
  std::string name;

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

/// One entry per change, in change order.
std::vector<CatalogEntry> event_catalog(const DModel& d);

struct ScriptEntry {
  std::uint64_t tick = 0;
  std::string stimulus;

  friend bool operator==(const ScriptEntry&, const ScriptEntry&) = default;
};

using StimulusScript = std::vector<ScriptEntry>;

/// Lines `<tick> <stimulus>`, `#` comments. Throws InvalidScript with the
/// line number when a line is malformed or ticks decrease.
StimulusScript parse_script(std::string_view text);

struct StimulusOutcome {
  std::uint64_t tick = 0;  // scheduled tick
  std::string stimulus;
  bool fired = false;

  friend bool operator==(const StimulusOutcome&, const StimulusOutcome&) = default;
};

struct BModel {
  std::vector<Event> events;  // by tick, then change id
  std::set<ChangePair> precedence;
  std::vector<StimulusOutcome> stimuli;
  bool truncated = false;

  friend bool operator==(const BModel&, const BModel&) = default;
};

/// Runs the script to completion: each stimulus whose gate state is active
/// fires a causal chain, one change per tick; a chain starts no earlier than
/// one tick after the previous chain ended. Stimuli gated on an inactive
/// state are dropped. Events at or past `max_ticks` are not emitted and the
/// result is marked truncated. Throws UnknownStimulus.
BModel simulate(const DModel& d, const StimulusScript& script,
                std::uint64_t max_ticks = 10'000);

/// Initial state followed by the target state of every shift event, as
/// state-thimac segments. Throws NotAnFsmModel if `d` has no init or ready
/// change.
std::vector<std::string> project_to_fsm_trace(const BModel& b, const DModel& d);

/// `tick=<n> id=<Ek> change=<id> name="<label>"` per event, then `result=`.
void write_trace(std::ostream& out, const BModel& b);
std::string trace_text(const BModel& b);

/// Places a static change at time `t`. A wall-clock label is appended to the
/// name: "A phoned B" + "May 23, 2012, 2:11 pm" gives
/// "A phoned B on May 23, 2012, at 2:11 pm".
Event attach_time(const StaticChange& change, const TimeTag& t,
                  std::string id = "E1");

/// The event as a model of its own: a thimac carrying the event's name and
/// time, holding the change's stages and internal arcs under re-rooted ids.
SModel event_model(const SModel& m, const StaticChange& change, const Event& event);

/// Change id used by events that belong to no region of the model, such as
/// waiting or a warning interleaved with the regular chronology.
inline constexpr std::string_view kRegionlessChange = "none";
Event regionless_event(std::string name, const TimeTag& t, std::string id);

}  // namespace tmkit
