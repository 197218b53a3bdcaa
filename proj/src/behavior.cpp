#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>
#include <sstream>

#include "tmkit/behavior.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/error.hpp"

namespace tmkit {

std::vector<CatalogEntry> event_catalog(const DModel& d) {
  std::vector<CatalogEntry> out;
  for (const StaticChange& change : d.changes) {
    out.push_back({change.id, change.kind, change.label});
  }
  return out;
}

StimulusScript parse_script(std::string_view text) {
  StimulusScript script;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string tick_text;
    std::string stimulus;
    std::string extra;
    if (!(fields >> tick_text)) continue;
    auto bad = [&](const std::string& why) {
      return Error(ErrorCode::InvalidScript,
                   "script line " + std::to_string(number) + ": " + why,
                   SourcePosition{number, 1});
    };
    ScriptEntry entry;
    auto [ptr, ec] = std::from_chars(
        tick_text.data(), tick_text.data() + tick_text.size(), entry.tick);
    if (ec != std::errc() || ptr != tick_text.data() + tick_text.size()) {
      throw bad("tick '" + tick_text + "' is not a non-negative integer");
    }
    if (!(fields >> stimulus)) throw bad("missing stimulus name");
    if (fields >> extra) throw bad("unexpected '" + extra + "'");
    if (!script.empty() && entry.tick < script.back().tick) {
      throw bad("ticks must not decrease");
    }
    entry.stimulus = std::move(stimulus);
    script.push_back(std::move(entry));
  }
  return script;
}

namespace {

std::string_view last_segment(std::string_view id) {
  auto dot = id.rfind('.');
  return dot == std::string_view::npos ? id : id.substr(dot + 1);
}

struct RawEvent {
  std::uint64_t tick;
  const StaticChange* change;
  std::optional<std::size_t> cause;
};

class Simulator {
 public:
  Simulator(const DModel& d, std::uint64_t max_ticks)
      : d_(d), max_ticks_(max_ticks) {
    for (const StaticChange& change : d.changes) {
      if (change.kind == ChangeKind::stimulus && change.stimulus) {
        gated_[*change.stimulus].push_back(&change);
      }
    }
  }

  BModel run(const StimulusScript& script) {
    for (const ScriptEntry& entry : script) {
      if (!gated_.contains(entry.stimulus)) {
        throw Error(ErrorCode::UnknownStimulus,
                    "no stimulus named '" + entry.stimulus + "'");
      }
    }

    std::vector<const StaticChange*> starts;
    for (const StaticChange& change : d_.changes) {
      if (change.kind == ChangeKind::init) starts.push_back(&change);
    }
    if (starts.empty()) {
      std::set<std::string_view> entered;
      for (const auto& [a, b] : d_.precedence) entered.insert(b);
      for (const StaticChange& change : d_.changes) {
        if (change.kind != ChangeKind::stimulus && !entered.contains(change.id)) {
          starts.push_back(&change);
        }
      }
    }
    if (!starts.empty()) fire(starts, 0);

    for (const ScriptEntry& entry : script) {
      if (b_.truncated) break;
      std::uint64_t tick = std::max(entry.tick, next_free_);
      if (tick >= max_ticks_) {
        b_.truncated = true;
        break;
      }
      const StaticChange* chosen = nullptr;
      for (const StaticChange* change : gated_.at(entry.stimulus)) {
        if (active_ && change->source_state == active_) chosen = change;
      }
      b_.stimuli.push_back({tick, entry.stimulus, chosen != nullptr});
      if (chosen) fire({chosen}, tick);
    }
    return finish();
  }

 private:
  // Emits one wave of changes per tick along precedence, each change at
  // most once per chain.
  void fire(std::vector<const StaticChange*> wave, std::uint64_t tick) {
    std::set<std::string_view> visited;
    std::vector<std::optional<std::size_t>> causes(wave.size());
    for (const StaticChange* change : wave) visited.insert(change->id);
    while (!wave.empty()) {
      if (tick >= max_ticks_) {
        b_.truncated = true;
        return;
      }
      std::vector<const StaticChange*> next;
      std::vector<std::optional<std::size_t>> next_causes;
      for (std::size_t i = 0; i < wave.size(); ++i) {
        const StaticChange& change = *wave[i];
        std::size_t index = raw_.size();
        raw_.push_back({tick, &change, causes[i]});
        if (change.kind == ChangeKind::ready || change.kind == ChangeKind::shift) {
          active_ = change.target_state;
        }
        for (const std::string& succ : d_.successors(change.id)) {
          const StaticChange* target = d_.find(succ);
          if (target->kind == ChangeKind::stimulus) continue;
          if (!visited.insert(target->id).second) continue;
          next.push_back(target);
          next_causes.push_back(index);
        }
      }
      wave = std::move(next);
      causes = std::move(next_causes);
      ++tick;
    }
    next_free_ = tick;
  }

  BModel finish() {
    std::vector<std::size_t> order(raw_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
      if (raw_[a].tick != raw_[b].tick) return raw_[a].tick < raw_[b].tick;
      return raw_[a].change->id < raw_[b].change->id;
    });
    std::vector<std::string> id_of(raw_.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      id_of[order[k]] = "E" + std::to_string(k + 1);
    }
    std::set<std::string_view> occurred;
    for (std::size_t i : order) {
      const RawEvent& raw = raw_[i];
      Event event;
      event.id = id_of[i];
      event.change = raw.change->id;
      event.time = {raw.tick, std::nullopt};
      event.name = raw.change->label;
      if (raw.cause) event.caused_by = id_of[*raw.cause];
      b_.events.push_back(std::move(event));
      occurred.insert(raw.change->id);
    }
    for (const ChangePair& pair : d_.precedence) {
      if (occurred.contains(pair.first) && occurred.contains(pair.second)) {
        b_.precedence.insert(pair);
      }
    }
    return std::move(b_);
  }

  const DModel& d_;
  std::uint64_t max_ticks_;
  std::map<std::string, std::vector<const StaticChange*>> gated_;
  std::optional<std::string> active_;
  std::uint64_t next_free_ = 0;
  std::vector<RawEvent> raw_;
  BModel b_;
};

}  // namespace

BModel simulate(const DModel& d, const StimulusScript& script,
                std::uint64_t max_ticks) {
  return Simulator(d, max_ticks).run(script);
}

std::vector<std::string> project_to_fsm_trace(const BModel& b, const DModel& d) {
  auto has = [&](ChangeKind kind) {
    return std::ranges::any_of(d.changes, [&](const StaticChange& c) {
      return c.kind == kind;
    });
  };
  auto ready = std::ranges::find(d.changes, ChangeKind::ready, &StaticChange::kind);
  if (!has(ChangeKind::init) || ready == d.changes.end()) {
    throw Error(ErrorCode::NotAnFsmModel,
                "model '" + d.source.name() + "' has no init and ready changes");
  }
  std::vector<std::string> trace{std::string(last_segment(*ready->target_state))};
  for (const Event& event : b.events) {
    const StaticChange* change = d.find(event.change);
    if (change && change->kind == ChangeKind::shift) {
      trace.emplace_back(last_segment(*change->target_state));
    }
  }
  return trace;
}

void write_trace(std::ostream& out, const BModel& b) {
  for (const Event& event : b.events) {
    out << "tick=" << event.time.tick << " id=" << event.id
        << " change=" << event.change << " name=" << quote(event.name) << '\n';
  }
  out << "result=" << (b.truncated ? "truncated" : "quiescent") << '\n';
}

std::string trace_text(const BModel& b) {
  std::ostringstream out;
  write_trace(out, b);
  return out.str();
}

namespace {

// "May 23, 2012, 2:11 pm" reads "on May 23, 2012, at 2:11 pm".
std::string when(std::string_view wall) {
  auto comma = wall.rfind(", ");
  std::string_view last = comma == std::string_view::npos ? wall : wall.substr(comma + 2);
  bool clock = last.find(':') != std::string_view::npos;
  if (!clock) return " on " + std::string(wall);
  if (comma == std::string_view::npos) return " at " + std::string(wall);
  return " on " + std::string(wall.substr(0, comma)) + ", at " + std::string(last);
}

}  // namespace

Event attach_time(const StaticChange& change, const TimeTag& t, std::string id) {
  Event event;
  event.id = std::move(id);
  event.change = change.id;
  event.time = t;
  event.name = change.label;
  if (t.wall_label) event.name += when(*t.wall_label);
  return event;
}

Event regionless_event(std::string name, const TimeTag& t, std::string id) {
  return {std::move(id), std::string(kRegionlessChange), t, std::move(name),
          std::nullopt};
}

namespace {

// Copies the part of `thimac` that holds change stages, prefixing every id.
std::optional<Thimac> restrict(const Thimac& thimac,
                               const std::set<std::string>& stages,
                               const std::string& prefix,
                               std::map<std::string, std::string>& renamed) {
  Thimac copy;
  copy.id = prefix + "." + thimac.id;
  copy.label = thimac.label;
  std::map<StageKind, std::size_t> ordinals;
  for (const Stage& stage : thimac.stages) {
    if (!stages.contains(stage.id)) continue;
    Stage kept = stage;
    kept.owner = copy.id;
    kept.id = stage_ref(copy.id, stage.kind, ordinals[stage.kind]++);
    renamed[stage.id] = kept.id;
    copy.stages.push_back(std::move(kept));
  }
  for (const Thimac& child : thimac.subthimacs) {
    if (auto sub = restrict(child, stages, prefix, renamed)) {
      copy.subthimacs.push_back(std::move(*sub));
    }
  }
  if (copy.stages.empty() && copy.subthimacs.empty()) return std::nullopt;
  return copy;
}

}  // namespace

SModel event_model(const SModel& m, const StaticChange& change,
                   const Event& event) {
  if (!is_identifier(event.id)) {
    throw Error(ErrorCode::InvalidId,
                "event id '" + event.id + "' is not an identifier");
  }
  std::set<std::string> stages(change.stages.begin(), change.stages.end());
  std::map<std::string, std::string> renamed;
  Thimac root;
  root.id = event.id;
  root.label = event.name;
  root.time = event.time;
  if (auto body = restrict(m.root(), stages, event.id, renamed)) {
    root.subthimacs.push_back(std::move(*body));
  }
  std::vector<FlowArc> flows;
  std::vector<TriggerArc> triggers;
  for (const ArcRef& arc : change.arcs) {
    if (arc.type == ArcType::flow) {
      const FlowArc* original = nullptr;
      for (const FlowArc& f : m.flows()) {
        if (f.src == arc.src && f.dst == arc.dst) original = &f;
      }
      flows.push_back({renamed.at(arc.src), renamed.at(arc.dst),
                       original ? original->annotation : std::nullopt});
    } else {
      triggers.push_back({renamed.at(arc.src), renamed.at(arc.dst)});
    }
  }
  return build_model(event.id, std::move(root), std::move(flows),
                     std::move(triggers));
}

}  // namespace tmkit
