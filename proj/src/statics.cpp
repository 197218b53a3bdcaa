#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <sstream>

#include "tmkit/dsl.hpp"
#include "tmkit/error.hpp"
#include "tmkit/statics.hpp"

namespace tmkit {

std::string_view to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::init: return "init";
    case ChangeKind::ready: return "ready";
    case ChangeKind::statePath: return "statePath";
    case ChangeKind::stimulus: return "stimulus";
    case ChangeKind::shift: return "shift";
    case ChangeKind::condition: return "condition";
  }
  return "?";
}

const StaticChange* DModel::find(std::string_view id) const {
  auto it = std::ranges::lower_bound(changes, id, {}, &StaticChange::id);
  return it != changes.end() && it->id == id ? &*it : nullptr;
}

std::vector<std::string> DModel::successors(std::string_view id) const {
  std::vector<std::string> out;
  for (auto it = precedence.lower_bound({std::string(id), std::string()});
       it != precedence.end() && it->first == id; ++it) {
    out.push_back(it->second);
  }
  return out;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

void require_valid(const SModel& m) {
  auto diagnostics = validate_s(m);
  if (!diagnostics.empty()) {
    throw Error(ErrorCode::UnvalidatedModel,
                "model '" + m.name() + "' has " +
                    std::to_string(diagnostics.size()) +
                    " diagnostic(s); run check first");
  }
}

bool same_owner(const SModel& m, SModel::Ends e) {
  return m.stages()[e.src].owner == m.stages()[e.dst].owner;
}

bool process_upstream(const SModel& m, std::size_t stage) {
  std::vector<std::size_t> todo{stage};
  std::set<std::size_t> seen{stage};
  while (!todo.empty()) {
    std::size_t at = todo.back();
    todo.pop_back();
    for (std::size_t arc : m.flows_in(at)) {
      auto e = m.flow_ends(arc);
      if (!same_owner(m, e) || !seen.insert(e.src).second) continue;
      if (m.stages()[e.src].kind == StageKind::process) return true;
      todo.push_back(e.src);
    }
  }
  return false;
}

// Flow arcs that separate a shift from the paths around it: the arcs into
// the sending release, and the arcs leaving the receiving side's receive
// phase.
std::set<std::size_t> shift_cuts(const SModel& m) {
  auto stages = m.stages();
  std::set<std::size_t> cuts;
  for (std::size_t arc = 0; arc < m.flows().size(); ++arc) {
    auto cross = m.flow_ends(arc);
    if (same_owner(m, cross)) continue;
    for (std::size_t in : m.flows_in(cross.src)) {
      auto e = m.flow_ends(in);
      if (!same_owner(m, e) || stages[e.src].kind != StageKind::release) continue;
      if (!process_upstream(m, e.src)) continue;
      for (std::size_t into_release : m.flows_in(e.src)) cuts.insert(into_release);

      std::vector<std::size_t> todo{cross.dst};
      std::set<std::size_t> seen{cross.dst};
      while (!todo.empty()) {
        std::size_t at = todo.back();
        todo.pop_back();
        for (std::size_t out : m.flows_out(at)) {
          auto next = m.flow_ends(out);
          if (!same_owner(m, next)) continue;
          StageKind kind = stages[next.dst].kind;
          if (!is_receive_phase(kind)) {
            if (is_receive_phase(stages[at].kind)) cuts.insert(out);
            continue;
          }
          if (seen.insert(next.dst).second) todo.push_back(next.dst);
        }
      }
    }
  }
  return cuts;
}

std::vector<std::size_t> default_regions(const SModel& m) {
  auto stages = m.stages();
  DisjointSets sets(stages.size());
  auto cuts = shift_cuts(m);
  for (std::size_t arc = 0; arc < m.flows().size(); ++arc) {
    if (cuts.contains(arc)) continue;
    auto e = m.flow_ends(arc);
    sets.unite(e.src, e.dst);
  }

  // A piece that neither creates nor receives anything only exists to
  // trigger; it belongs with what it triggers.
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < stages.size(); ++i) members[sets.find(i)].push_back(i);
  std::vector<std::pair<std::size_t, std::size_t>> joins;
  for (const auto& [root, group] : members) {
    bool bare = std::ranges::none_of(group, [&](std::size_t s) {
      return stages[s].kind == StageKind::create ||
             stages[s].kind == StageKind::transfer_input;
    });
    if (!bare) continue;
    for (std::size_t s : group) {
      for (std::size_t arc : m.triggers_out(s)) {
        joins.emplace_back(s, m.trigger_ends(arc).dst);
      }
    }
  }
  for (auto [a, b] : joins) sets.unite(a, b);

  std::vector<std::size_t> region(stages.size());
  std::map<std::size_t, std::size_t> number;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    auto [it, added] = number.emplace(sets.find(i), number.size());
    region[i] = it->second;
  }
  return region;
}

std::string_view last_segment(std::string_view id) {
  auto dot = id.rfind('.');
  return dot == std::string_view::npos ? id : id.substr(dot + 1);
}

std::string capitalized(std::string text) {
  if (!text.empty()) {
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  }
  return text;
}

std::string common_ancestor(std::string a, std::string_view b) {
  while (!(b == a || (b.starts_with(a) && b.size() > a.size() && b[a.size()] == '.'))) {
    auto dot = a.rfind('.');
    if (dot == std::string::npos) return a;
    a.resize(dot);
  }
  return a;
}

// Kinds and names for a stage partition given as one region index per stage.
class ChangeBuilder {
 public:
  ChangeBuilder(const SModel& m, std::vector<std::size_t> region)
      : m_(m), region_(std::move(region)) {
    std::size_t count = 0;
    for (std::size_t r : region_) count = std::max(count, r + 1);
    members_.resize(count);
    for (std::size_t s = 0; s < region_.size(); ++s) members_[region_[s]].push_back(s);
  }

  std::vector<StaticChange> build() {
    std::size_t n = members_.size();
    kinds_.assign(n, ChangeKind::statePath);
    for (std::size_t r = 0; r < n; ++r) {
      if (is_shift(r)) kinds_[r] = ChangeKind::shift;
      else if (internal_trigger(r)) kinds_[r] = ChangeKind::condition;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (kinds_[r] == ChangeKind::statePath && has_kind(r, StageKind::create) &&
          !fed_shifts(r).empty()) {
        kinds_[r] = ChangeKind::stimulus;
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (kinds_[r] == ChangeKind::statePath && !has_incoming(r) &&
          !outgoing_triggers(r).empty()) {
        kinds_[r] = ChangeKind::init;
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (kinds_[r] == ChangeKind::statePath && ready_stage(r)) {
        kinds_[r] = ChangeKind::ready;
      }
    }

    std::vector<StaticChange> changes;
    for (std::size_t r = 0; r < n; ++r) changes.push_back(describe(r));
    number_duplicates(changes);
    std::ranges::sort(changes, {}, &StaticChange::id);
    return changes;
  }

 private:
  const Stage& stage(std::size_t s) const { return m_.stages()[s]; }
  const std::string& label_of(std::string_view thimac) const {
    return m_.find_thimac(thimac)->label;
  }

  bool has_kind(std::size_t r, StageKind kind) const {
    return std::ranges::any_of(members_[r],
                               [&](std::size_t s) { return stage(s).kind == kind; });
  }

  std::optional<SModel::Ends> internal_cross_flow(std::size_t r) const {
    for (std::size_t s : members_[r]) {
      for (std::size_t arc : m_.flows_out(s)) {
        auto e = m_.flow_ends(arc);
        if (region_[e.dst] == r && !same_owner(m_, e)) return e;
      }
    }
    return std::nullopt;
  }

  bool is_shift(std::size_t r) const {
    return internal_cross_flow(r) && !has_kind(r, StageKind::create) &&
           !has_kind(r, StageKind::process);
  }

  std::optional<SModel::Ends> internal_trigger(std::size_t r) const {
    for (std::size_t s : members_[r]) {
      for (std::size_t arc : m_.triggers_out(s)) {
        auto e = m_.trigger_ends(arc);
        if (region_[e.dst] == r) return e;
      }
    }
    return std::nullopt;
  }

  std::vector<std::size_t> fed_shifts(std::size_t r) const {
    std::set<std::size_t> out;
    for (std::size_t s : members_[r]) {
      for (std::size_t arc : m_.flows_out(s)) {
        std::size_t to = region_[m_.flow_ends(arc).dst];
        if (to != r && kinds_[to] == ChangeKind::shift) out.insert(to);
      }
    }
    return {out.begin(), out.end()};
  }

  bool has_incoming(std::size_t r) const {
    for (std::size_t s : members_[r]) {
      for (std::size_t arc : m_.flows_in(s)) {
        if (region_[m_.flow_ends(arc).src] != r) return true;
      }
      for (std::size_t arc : m_.triggers_in(s)) {
        if (region_[m_.trigger_ends(arc).src] != r) return true;
      }
    }
    return false;
  }

  std::vector<SModel::Ends> outgoing_triggers(std::size_t r) const {
    std::vector<SModel::Ends> out;
    for (std::size_t s : members_[r]) {
      for (std::size_t arc : m_.triggers_out(s)) {
        auto e = m_.trigger_ends(arc);
        if (region_[e.dst] != r) out.push_back(e);
      }
    }
    return out;
  }

  // The stage of r triggered from an init region, if any.
  std::optional<std::size_t> ready_stage(std::size_t r) const {
    for (std::size_t s : members_[r]) {
      for (std::size_t arc : m_.triggers_in(s)) {
        std::size_t from = region_[m_.trigger_ends(arc).src];
        if (from != r && kinds_[from] == ChangeKind::init) return s;
      }
    }
    return std::nullopt;
  }

  std::size_t first_of_kind(std::size_t r, StageKind kind) const {
    for (std::size_t s : members_[r]) {
      if (stage(s).kind == kind) return s;
    }
    return members_[r].front();
  }

  std::string lowest_common_thimac(std::size_t r) const {
    std::string lca = stage(members_[r].front()).owner;
    for (std::size_t s : members_[r]) lca = common_ancestor(lca, stage(s).owner);
    return lca;
  }

  StaticChange describe(std::size_t r) const {
    StaticChange change;
    change.kind = kinds_[r];
    for (std::size_t s : members_[r]) {
      change.stages.push_back(stage(s).id);
      for (std::size_t arc : m_.flows_out(s)) {
        const FlowArc& flow = m_.flows()[arc];
        if (region_[m_.flow_ends(arc).dst] == r) {
          change.arcs.push_back({ArcType::flow, flow.src, flow.dst});
        }
      }
      for (std::size_t arc : m_.triggers_out(s)) {
        const TriggerArc& trigger = m_.triggers()[arc];
        if (region_[m_.trigger_ends(arc).dst] == r) {
          change.arcs.push_back({ArcType::trigger, trigger.src, trigger.dst});
        }
      }
    }
    std::ranges::sort(change.stages);
    std::ranges::sort(change.arcs);

    switch (change.kind) {
      case ChangeKind::init: {
        const std::string& owner = stage(first_of_kind(r, StageKind::create)).owner;
        change.id = "init";
        change.label = "Starting " + label_of(owner);
        break;
      }
      case ChangeKind::ready: {
        const std::string& state = stage(*ready_stage(r)).owner;
        change.id = "ready." + std::string(last_segment(state));
        change.label = capitalized(label_of(state)) + " is ready";
        change.target_state = state;
        break;
      }
      case ChangeKind::shift: {
        auto e = *internal_cross_flow(r);
        const std::string& from = stage(e.src).owner;
        const std::string& to = stage(e.dst).owner;
        change.id = "shift." + std::string(last_segment(from)) + "." +
                    std::string(last_segment(to));
        change.label = "Shifting from " + label_of(from) + " to " + label_of(to);
        change.source_state = from;
        change.target_state = to;
        break;
      }
      case ChangeKind::stimulus: {
        const std::string& sender = stage(first_of_kind(r, StageKind::create)).owner;
        auto cross = internal_cross_flow(r);
        std::string gate = cross ? stage(cross->dst).owner : sender;
        const std::string& target =
            stage(internal_cross_flow(fed_shifts(r).front())->dst).owner;
        const std::string& signal = label_of(sender);
        change.id = "stimulus." + std::string(last_segment(gate)) + "." +
                    (is_identifier(signal) ? signal
                                           : std::string(last_segment(sender)));
        change.label = "Selecting from " + label_of(gate) + " to " +
                       label_of(target);
        change.source_state = gate;
        change.target_state = target;
        change.stimulus = signal;
        break;
      }
      case ChangeKind::condition: {
        auto e = *internal_trigger(r);
        const std::string& state = stage(e.src).owner;
        change.id = "condition." + std::string(last_segment(state));
        change.label = label_of(stage(e.dst).owner) + " in " + label_of(state);
        change.source_state = state;
        break;
      }
      case ChangeKind::statePath: {
        std::string lca = lowest_common_thimac(r);
        change.id = "path." + std::string(last_segment(lca));
        change.label = label_of(lca);
        break;
      }
    }
    return change;
  }

  // Equal ids get #1, #2, ... in order of their smallest stage id.
  static void number_duplicates(std::vector<StaticChange>& changes) {
    std::map<std::string, std::vector<StaticChange*>> by_id;
    for (StaticChange& change : changes) by_id[change.id].push_back(&change);
    for (auto& [id, group] : by_id) {
      if (group.size() < 2) continue;
      std::ranges::sort(group, {}, [](const StaticChange* c) { return c->stages.front(); });
      for (std::size_t i = 1; i < group.size(); ++i) {
        group[i]->id += "#" + std::to_string(i);
      }
    }
  }

  const SModel& m_;
  std::vector<std::size_t> region_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<ChangeKind> kinds_;
};

bool weakly_connected(const SModel& m, const std::vector<std::size_t>& region,
                      std::size_t r, const std::vector<std::size_t>& members) {
  std::set<std::size_t> seen{members.front()};
  std::vector<std::size_t> todo{members.front()};
  auto visit = [&](std::size_t s) {
    if (region[s] == r && seen.insert(s).second) todo.push_back(s);
  };
  while (!todo.empty()) {
    std::size_t s = todo.back();
    todo.pop_back();
    for (std::size_t arc : m.flows_out(s)) visit(m.flow_ends(arc).dst);
    for (std::size_t arc : m.flows_in(s)) visit(m.flow_ends(arc).src);
    for (std::size_t arc : m.triggers_out(s)) visit(m.trigger_ends(arc).dst);
    for (std::size_t arc : m.triggers_in(s)) visit(m.trigger_ends(arc).src);
  }
  return seen.size() == members.size();
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (const std::string& item : items) {
    if (!out.empty()) out += sep;
    out += item;
  }
  return out;
}

}  // namespace

std::vector<StaticChange> decompose(const SModel& m) {
  require_valid(m);
  if (m.stages().empty()) return {};
  return ChangeBuilder(m, default_regions(m)).build();
}

std::vector<StaticChange> decompose_with_regions(
    const SModel& m, const std::vector<std::vector<std::string>>& regions) {
  require_valid(m);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> region(m.stages().size(), kNone);
  std::vector<std::vector<std::size_t>> members(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (regions[r].empty()) {
      throw Error(ErrorCode::DisconnectedRegion,
                  "region " + std::to_string(r + 1) + " is empty");
    }
    for (const std::string& ref : regions[r]) {
      std::size_t s = m.stage_index(parse_stage_ref(ref));
      if (region[s] != kNone) {
        throw Error(ErrorCode::OverlappingRegions,
                    "stage " + m.stages()[s].id + " is in regions " +
                        std::to_string(region[s] + 1) + " and " +
                        std::to_string(r + 1));
      }
      region[s] = r;
      members[r].push_back(s);
    }
  }
  std::vector<std::string> uncovered;
  for (std::size_t s = 0; s < region.size(); ++s) {
    if (region[s] == kNone) uncovered.push_back(m.stages()[s].id);
  }
  if (!uncovered.empty()) {
    throw Error(ErrorCode::UncoveredStage,
                "stages in no region: " + join(uncovered, ", "));
  }
  for (std::size_t r = 0; r < members.size(); ++r) {
    if (!weakly_connected(m, region, r, members[r])) {
      std::vector<std::string> ids;
      for (std::size_t s : members[r]) ids.push_back(m.stages()[s].id);
      throw Error(ErrorCode::DisconnectedRegion,
                  "region " + std::to_string(r + 1) +
                      " is not connected: " + join(ids, ", "));
    }
  }
  return ChangeBuilder(m, std::move(region)).build();
}

std::vector<std::vector<std::string>> parse_regions(std::string_view text) {
  std::vector<std::vector<std::string>> regions;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    // Comments start at a '#' that begins an item; `A:create#1` is an ordinal.
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' ||
                             line[i - 1] == '\t' || line[i - 1] == ',')) {
        line.resize(i);
        break;
      }
    }
    std::vector<std::string> refs;
    std::istringstream items(line);
    std::string item;
    while (std::getline(items, item, ',')) {
      auto begin = item.find_first_not_of(" \t\r");
      if (begin == std::string::npos) continue;
      auto end = item.find_last_not_of(" \t\r");
      refs.push_back(item.substr(begin, end - begin + 1));
    }
    if (!refs.empty()) regions.push_back(std::move(refs));
  }
  return regions;
}

std::string format_regions(const std::vector<StaticChange>& changes) {
  std::ostringstream out;
  out << "# " << changes.size() << " static changes\n";
  for (const StaticChange& change : changes) {
    out << "# " << change.id << ' ' << to_string(change.kind) << ' '
        << quote(change.label) << '\n'
        << join(change.stages, ", ") << '\n';
  }
  return out.str();
}

DModel order_changes(const SModel& m, std::vector<StaticChange> changes) {
  std::ranges::sort(changes, {}, &StaticChange::id);
  std::map<std::string_view, std::string_view> change_of;
  for (const StaticChange& change : changes) {
    for (const std::string& stage : change.stages) change_of[stage] = change.id;
  }
  std::set<ChangePair> precedence;
  auto link = [&](const std::string& src, const std::string& dst) {
    auto a = change_of.at(src);
    auto b = change_of.at(dst);
    if (a != b) precedence.emplace(a, b);
  };
  for (const FlowArc& arc : m.flows()) link(arc.src, arc.dst);
  for (const TriggerArc& arc : m.triggers()) link(arc.src, arc.dst);
  return {m, std::move(changes), std::move(precedence)};
}

std::set<ChangePair> simultaneous(const DModel& d) {
  std::map<std::string_view, std::string_view> change_of;
  for (const StaticChange& change : d.changes) {
    for (const std::string& stage : change.stages) change_of[stage] = change.id;
  }
  std::map<std::string_view, std::set<std::string_view>> entered;
  for (const TriggerArc& arc : d.source.triggers()) {
    entered[arc.src].insert(change_of.at(arc.dst));
  }
  std::set<ChangePair> out;
  for (const auto& [stage, targets] : entered) {
    for (auto a = targets.begin(); a != targets.end(); ++a) {
      for (auto b = std::next(a); b != targets.end(); ++b) {
        out.emplace(std::string(*a), std::string(*b));
      }
    }
  }
  return out;
}

}  // namespace tmkit
