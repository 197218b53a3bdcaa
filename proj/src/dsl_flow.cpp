#include <algorithm>
#include <map>

#include "tmkit/dsl.hpp"
#include "tmkit/error.hpp"

namespace tmkit {

namespace {

struct ParsedToken {
  StageKind kind;
  bool expanded_receive;
};

std::vector<std::string_view> split_dots(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (true) {
    auto dot = text.find('.', begin);
    parts.push_back(text.substr(begin, dot - begin));
    if (dot == std::string_view::npos) break;
    begin = dot + 1;
  }
  return parts;
}

std::vector<ParsedToken> tokenize(std::string_view text) {
  if (text.empty()) {
    throw Error(ErrorCode::EmptyFlowString, "empty flow string");
  }
  auto parts = split_dots(text);
  if (parts.front() != "Flow") {
    throw Error(ErrorCode::UnknownToken, "flow string must begin with 'Flow', got '" +
                                             std::string(parts.front()) + "'");
  }
  if (parts.size() == 1) {
    throw Error(ErrorCode::EmptyFlowString, "flow string has no stages");
  }

  std::vector<ParsedToken> out;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    std::string_view token = parts[i];
    if (token == "transfer") {
      std::string_view dir = i + 1 < parts.size() ? parts[i + 1] : "";
      if (dir == "input") {
        out.push_back({StageKind::transfer_input, false});
      } else if (dir == "output") {
        out.push_back({StageKind::transfer_output, false});
      } else {
        throw Error(ErrorCode::MisplacedDirection,
                    "transfer must be followed by input or output");
      }
      ++i;
    } else if (token == "input" || token == "output") {
      throw Error(ErrorCode::MisplacedDirection,
                  "'" + std::string(token) + "' must directly follow transfer");
    } else if (token == "receive") {
      if (i + 1 < parts.size() && parts[i + 1] == "arrive") {
        out.push_back({StageKind::arrive, true});
        ++i;
      } else {
        out.push_back({StageKind::receive, false});
      }
    } else if (token == "create") {
      out.push_back({StageKind::create, false});
    } else if (token == "process") {
      out.push_back({StageKind::process, false});
    } else if (token == "release") {
      out.push_back({StageKind::release, false});
    } else if (token == "arrive") {
      out.push_back({StageKind::arrive, false});
    } else if (token == "accept") {
      out.push_back({StageKind::accept, false});
    } else {
      throw Error(ErrorCode::UnknownToken,
                  "unknown flow token '" + std::string(token) + "'");
    }
  }
  return out;
}

}  // namespace

std::vector<StageKind> flow_string_kinds(std::string_view text) {
  std::vector<StageKind> kinds;
  for (const ParsedToken& token : tokenize(text)) kinds.push_back(token.kind);
  return kinds;
}

FlowPath parse_flow_string(std::string_view text, std::string_view owner,
                           std::span<const StageKind> existing) {
  std::map<StageKind, std::size_t> ordinals;
  for (StageKind kind : existing) ++ordinals[kind];

  FlowPath path;
  for (const ParsedToken& token : tokenize(text)) {
    Stage stage;
    stage.kind = token.kind;
    stage.owner = std::string(owner);
    stage.expanded_receive = token.expanded_receive;
    stage.id = stage_ref(owner, token.kind, ordinals[token.kind]++);
    if (!path.stages.empty()) {
      path.arcs.push_back({path.stages.back().id, stage.id, std::nullopt});
    }
    path.stages.push_back(std::move(stage));
  }
  return path;
}

std::string format_flow_string(std::span<const Stage> stages) {
  std::string text = "Flow";
  for (const Stage& stage : stages) {
    switch (stage.kind) {
      case StageKind::transfer_input: text += ".transfer.input"; break;
      case StageKind::transfer_output: text += ".transfer.output"; break;
      case StageKind::arrive:
        text += stage.expanded_receive ? ".receive.arrive" : ".arrive";
        break;
      default:
        text += '.';
        text += to_string(stage.kind);
    }
  }
  return text;
}

std::vector<FlowString> to_flow_strings(const SModel& m) {
  auto stages = m.stages();
  std::vector<std::vector<std::size_t>> succ(stages.size());
  std::vector<bool> has_pred(stages.size(), false);
  for (std::size_t arc = 0; arc < m.flows().size(); ++arc) {
    auto [src, dst] = m.flow_ends(arc);
    if (stages[src].owner != stages[dst].owner) continue;
    succ[src].push_back(dst);
    has_pred[dst] = true;
  }
  for (auto& next : succ) std::ranges::sort(next);

  std::vector<FlowString> out;
  std::vector<Stage> path;
  auto walk = [&](auto&& self, std::size_t at) -> void {
    path.push_back(stages[at]);
    bool extended = false;
    for (std::size_t next : succ[at]) {
      bool on_path = std::ranges::any_of(
          path, [&](const Stage& s) { return s.id == stages[next].id; });
      if (on_path) continue;
      extended = true;
      self(self, next);
    }
    if (!extended) out.push_back({stages[at].owner, format_flow_string(path)});
    path.pop_back();
  };
  // stages() is already grouped by thimac in pre-order.
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (!has_pred[i]) walk(walk, i);
  }
  return out;
}

}  // namespace tmkit
