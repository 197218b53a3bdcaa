#include <algorithm>
#include <array>
#include <bitset>
#include <string>

#include "tmkit/model.hpp"

namespace tmkit {

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::path_shape: return "RULE_PATH_SHAPE";
    case Rule::path_cycle: return "RULE_PATH_CYCLE";
    case Rule::cross_flow: return "RULE_CROSS_FLOW";
    case Rule::trigger_target: return "RULE_TRIGGER_TARGET";
    case Rule::trigger_over_flow: return "RULE_TRIGGER_OVER_FLOW";
    case Rule::trigger_self: return "RULE_TRIGGER_SELF";
  }
  return "RULE_UNKNOWN";
}

// Recognizer for the two path templates:
//   generative: create [process] [release transfer(output)]
//   inbound:    transfer(input) (receive | arrive [accept]) [process]
//               [release transfer(output)]
namespace {

enum : PathTemplate::State {
  kStart = 0,
  kCreated,
  kProcessed,
  kReleased,
  kSent,
  kEntered,
  kReceived,
  kArrived,
  kAccepted,
  kStateCount,
  kDead = 0xff,
};

}  // namespace

PathTemplate::State PathTemplate::next(State state, StageKind kind) {
  switch (state) {
    case kStart:
      if (kind == StageKind::create) return kCreated;
      if (kind == StageKind::transfer_input) return kEntered;
      return kDead;
    case kCreated:
    case kReceived:
    case kArrived:
    case kAccepted:
      if (state == kArrived && kind == StageKind::accept) return kAccepted;
      if (kind == StageKind::process) return kProcessed;
      if (kind == StageKind::release) return kReleased;
      return kDead;
    case kProcessed:
      return kind == StageKind::release ? kReleased : kDead;
    case kReleased:
      return kind == StageKind::transfer_output ? kSent : kDead;
    case kEntered:
      if (kind == StageKind::receive) return kReceived;
      if (kind == StageKind::arrive) return kArrived;
      return kDead;
    default:
      return kDead;
  }
}

bool PathTemplate::dead(State state) { return state >= kStateCount; }

bool PathTemplate::accepting(State state) {
  switch (state) {
    case kCreated:
    case kProcessed:
    case kSent:
    case kReceived:
    case kArrived:
    case kAccepted:
      return true;
    default:
      return false;
  }
}

bool PathTemplate::matches(std::span<const StageKind> path) {
  State state = start();
  for (StageKind kind : path) {
    state = next(state, kind);
    if (dead(state)) return false;
  }
  return accepting(state);
}

namespace {

using StateSet = std::bitset<kStateCount>;

std::string kind_name(const Stage& stage) {
  return std::string(to_string(stage.kind));
}

void check_paths(const SModel& m, std::vector<Diagnostic>& out) {
  auto stages = m.stages();
  std::size_t n = stages.size();

  // Intra-thimac flow adjacency.
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t arc = 0; arc < m.flows().size(); ++arc) {
    auto [src, dst] = m.flow_ends(arc);
    if (stages[src].owner != stages[dst].owner) continue;
    succ[src].push_back(dst);
    ++indegree[dst];
  }

  std::vector<std::size_t> order;
  std::vector<std::size_t> remaining = indegree;
  for (std::size_t i = 0; i < n; ++i) {
    if (remaining[i] == 0) order.push_back(i);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (std::size_t next : succ[order[k]]) {
      if (--remaining[next] == 0) order.push_back(next);
    }
  }
  if (order.size() < n) {
    std::vector<std::string> cyclic;
    for (std::size_t i = 0; i < n; ++i) {
      if (remaining[i] > 0) cyclic.push_back(stages[i].id);
    }
    std::ranges::sort(cyclic);
    out.push_back({Rule::path_cycle, std::move(cyclic),
                   "intra-thimac flows form a cycle"});
  }

  std::vector<StateSet> reached(n);
  for (std::size_t i : order) {
    const Stage& stage = stages[i];
    if (indegree[i] == 0) {
      auto state = PathTemplate::next(PathTemplate::start(), stage.kind);
      if (PathTemplate::dead(state)) {
        out.push_back({Rule::path_shape, {stage.id},
                       "a flow path cannot start with " + kind_name(stage)});
      } else {
        reached[i].set(state);
      }
    }
    for (std::size_t next : succ[i]) {
      for (std::size_t q = 0; q < kStateCount; ++q) {
        if (!reached[i].test(q)) continue;
        auto state = PathTemplate::next(static_cast<PathTemplate::State>(q),
                                        stages[next].kind);
        if (PathTemplate::dead(state)) {
          out.push_back({Rule::path_shape,
                         {stage.id, stages[next].id},
                         kind_name(stage) + " cannot precede " +
                             kind_name(stages[next])});
        } else {
          reached[next].set(state);
        }
      }
    }
    if (succ[i].empty()) {
      for (std::size_t q = 0; q < kStateCount; ++q) {
        if (reached[i].test(q) &&
            !PathTemplate::accepting(static_cast<PathTemplate::State>(q))) {
          out.push_back({Rule::path_shape, {stage.id},
                         "a flow path cannot end with " + kind_name(stage)});
          break;
        }
      }
    }
  }
}

void check_cross_flows(const SModel& m, std::vector<Diagnostic>& out) {
  auto stages = m.stages();
  for (std::size_t arc = 0; arc < m.flows().size(); ++arc) {
    auto [src, dst] = m.flow_ends(arc);
    if (stages[src].owner == stages[dst].owner) continue;
    if (stages[src].kind != StageKind::transfer_output ||
        stages[dst].kind != StageKind::transfer_input) {
      out.push_back({Rule::cross_flow,
                     {stages[src].id, stages[dst].id},
                     "a flow between thimacs must run transfer(output) -> "
                     "transfer(input), not " +
                         kind_name(stages[src]) + " -> " +
                         kind_name(stages[dst])});
    }
  }
}

void check_triggers(const SModel& m, std::vector<Diagnostic>& out) {
  auto stages = m.stages();
  for (std::size_t arc = 0; arc < m.triggers().size(); ++arc) {
    auto [src, dst] = m.trigger_ends(arc);
    const Stage& from = stages[src];
    const Stage& to = stages[dst];
    if (src == dst) {
      out.push_back({Rule::trigger_self, {from.id}, "a stage cannot trigger itself"});
    }
    if (to.kind != StageKind::create && to.kind != StageKind::process) {
      out.push_back({Rule::trigger_target,
                     {from.id, to.id},
                     "a trigger must land on create or process, not " +
                         kind_name(to)});
    }
    for (std::size_t flow : m.flows_out(src)) {
      if (m.flow_ends(flow).dst == dst) {
        out.push_back({Rule::trigger_over_flow,
                       {from.id, to.id},
                       "a trigger duplicates an existing flow"});
      }
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate_s(const SModel& m) {
  std::vector<Diagnostic> out;
  check_paths(m, out);
  check_cross_flows(m, out);
  check_triggers(m, out);
  std::ranges::sort(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace tmkit
