#include "tmkit/model.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "tmkit/error.hpp"

namespace tmkit {

std::string_view to_string(StageKind kind) {
  switch (kind) {
    case StageKind::create: return "create";
    case StageKind::process: return "process";
    case StageKind::release: return "release";
    case StageKind::transfer_input: return "transfer(input)";
    case StageKind::transfer_output: return "transfer(output)";
    case StageKind::receive: return "receive";
    case StageKind::arrive: return "arrive";
    case StageKind::accept: return "accept";
  }
  return "?";
}

std::optional<StageKind> stage_kind_from_string(std::string_view text) {
  for (StageKind kind : kAllStageKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

bool is_transfer(StageKind kind) {
  return kind == StageKind::transfer_input ||
         kind == StageKind::transfer_output;
}

bool is_receive_phase(StageKind kind) {
  return kind == StageKind::receive || kind == StageKind::arrive ||
         kind == StageKind::accept;
}

std::string_view Thimac::segment() const {
  auto dot = id.rfind('.');
  return dot == std::string::npos ? std::string_view(id)
                                  : std::string_view(id).substr(dot + 1);
}

std::string stage_ref(std::string_view thimac, StageKind kind,
                      std::size_t ordinal) {
  std::string ref(thimac);
  ref += ':';
  ref += to_string(kind);
  if (ordinal > 0) {
    ref += '#';
    ref += std::to_string(ordinal);
  }
  return ref;
}

std::string child_id(std::string_view parent, std::string_view segment) {
  std::string id(parent);
  id += '.';
  id += segment;
  return id;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(text.front())) return false;
  return std::all_of(text.begin(), text.end(),
                     [&](char c) { return alpha(c) || digit(c) || c == '-'; });
}

struct SModel::Data {
  std::string name;
  Thimac root;
  std::vector<FlowArc> flows;
  std::vector<TriggerArc> triggers;

  std::vector<Stage> stages;
  std::vector<const Thimac*> thimacs;
  std::vector<std::size_t> stage_owner;
  std::map<std::string, std::size_t, std::less<>> stage_by_id;
  std::map<std::string, std::size_t, std::less<>> thimac_by_id;
  std::vector<Ends> flow_ends;
  std::vector<Ends> trigger_ends;
  std::vector<std::vector<std::size_t>> flows_out, flows_in;
  std::vector<std::vector<std::size_t>> triggers_out, triggers_in;
};

SModel::SModel(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

const std::string& SModel::name() const { return data_->name; }
const Thimac& SModel::root() const { return data_->root; }
std::span<const FlowArc> SModel::flows() const { return data_->flows; }
std::span<const TriggerArc> SModel::triggers() const {
  return data_->triggers;
}
std::span<const Stage> SModel::stages() const { return data_->stages; }
std::span<const Thimac* const> SModel::thimacs() const {
  return data_->thimacs;
}

const Stage* SModel::find_stage(std::string_view id) const {
  auto it = data_->stage_by_id.find(id);
  return it == data_->stage_by_id.end() ? nullptr
                                        : &data_->stages[it->second];
}

const Thimac* SModel::find_thimac(std::string_view id) const {
  auto it = data_->thimac_by_id.find(id);
  return it == data_->thimac_by_id.end() ? nullptr
                                         : data_->thimacs[it->second];
}

std::size_t SModel::stage_index(std::string_view id) const {
  auto it = data_->stage_by_id.find(id);
  if (it == data_->stage_by_id.end()) {
    throw Error(ErrorCode::DanglingReference,
                "unknown stage '" + std::string(id) + "'");
  }
  return it->second;
}

const Thimac& SModel::owner(std::size_t stage) const {
  return *data_->thimacs[data_->stage_owner[stage]];
}

SModel::Ends SModel::flow_ends(std::size_t arc) const {
  return data_->flow_ends[arc];
}
SModel::Ends SModel::trigger_ends(std::size_t arc) const {
  return data_->trigger_ends[arc];
}
std::span<const std::size_t> SModel::flows_out(std::size_t stage) const {
  return data_->flows_out[stage];
}
std::span<const std::size_t> SModel::flows_in(std::size_t stage) const {
  return data_->flows_in[stage];
}
std::span<const std::size_t> SModel::triggers_out(std::size_t stage) const {
  return data_->triggers_out[stage];
}
std::span<const std::size_t> SModel::triggers_in(std::size_t stage) const {
  return data_->triggers_in[stage];
}

bool operator==(const SModel& a, const SModel& b) {
  if (a.data_ == b.data_) return true;
  return a.name() == b.name() && a.root() == b.root() &&
         std::ranges::equal(a.flows(), b.flows()) &&
         std::ranges::equal(a.triggers(), b.triggers());
}

namespace {

void normalize_tree(Thimac& thimac, std::string_view parent,
                    std::map<std::string, std::size_t, std::less<>>& seen) {
  std::string_view segment = thimac.segment();
  bool well_formed =
      parent.empty() ? is_identifier(thimac.id)
                     : thimac.id == child_id(parent, segment) &&
                           is_identifier(segment);
  if (!well_formed) {
    throw Error(ErrorCode::InvalidId,
                "thimac id '" + thimac.id + "' is not " +
                    (parent.empty() ? std::string("a plain identifier")
                                    : "'" + std::string(parent) +
                                          ".<segment>'"));
  }
  if (!seen.emplace(thimac.id, seen.size()).second) {
    throw Error(ErrorCode::DuplicateId, "duplicate thimac id '" + thimac.id +
                                            "'");
  }
  if (thimac.label.empty()) thimac.label = std::string(segment);

  std::map<StageKind, std::size_t> ordinals;
  for (Stage& stage : thimac.stages) {
    stage.owner = thimac.id;
    stage.id = stage_ref(thimac.id, stage.kind, ordinals[stage.kind]++);
    if (stage.kind != StageKind::arrive) stage.expanded_receive = false;
  }
  for (Thimac& child : thimac.subthimacs) normalize_tree(child, thimac.id, seen);
}

void index_tree(const Thimac& thimac,
                std::vector<const Thimac*>& thimacs, std::vector<Stage>& stages,
                std::vector<std::size_t>& owners) {
  std::size_t self = thimacs.size();
  thimacs.push_back(&thimac);
  for (const Stage& stage : thimac.stages) {
    stages.push_back(stage);
    owners.push_back(self);
  }
  for (const Thimac& child : thimac.subthimacs) {
    index_tree(child, thimacs, stages, owners);
  }
}

template <typename Arc>
void sort_and_check(std::vector<Arc>& arcs, std::string_view what) {
  std::ranges::sort(arcs, [](const Arc& a, const Arc& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  auto dup = std::ranges::adjacent_find(arcs, [](const Arc& a, const Arc& b) {
    return a.src == b.src && a.dst == b.dst;
  });
  if (dup != arcs.end()) {
    throw Error(ErrorCode::DuplicateArc, "duplicate " + std::string(what) +
                                             " " + dup->src + " -> " +
                                             dup->dst);
  }
}

}  // namespace

SModel build_model(std::string name, Thimac root, std::vector<FlowArc> flows,
                   std::vector<TriggerArc> triggers) {
  auto data = std::make_shared<SModel::Data>();
  data->name = std::move(name);
  data->root = std::move(root);

  std::map<std::string, std::size_t, std::less<>> seen;
  normalize_tree(data->root, {}, seen);
  index_tree(data->root, data->thimacs, data->stages,
             data->stage_owner);
  for (std::size_t i = 0; i < data->thimacs.size(); ++i) {
    data->thimac_by_id.emplace(data->thimacs[i]->id, i);
  }
  for (std::size_t i = 0; i < data->stages.size(); ++i) {
    data->stage_by_id.emplace(data->stages[i].id, i);
  }

  auto resolve = [&](const std::string& ref, std::string_view what) {
    auto it = data->stage_by_id.find(ref);
    if (it == data->stage_by_id.end()) {
      throw Error(ErrorCode::DanglingReference,
                  std::string(what) + " endpoint '" + ref + "' not found");
    }
    return it->second;
  };

  sort_and_check(flows, "flow");
  sort_and_check(triggers, "trigger");
  data->flows = std::move(flows);
  data->triggers = std::move(triggers);

  std::size_t n = data->stages.size();
  data->flows_out.resize(n);
  data->flows_in.resize(n);
  data->triggers_out.resize(n);
  data->triggers_in.resize(n);
  for (std::size_t i = 0; i < data->flows.size(); ++i) {
    SModel::Ends ends{resolve(data->flows[i].src, "flow"),
                      resolve(data->flows[i].dst, "flow")};
    data->flow_ends.push_back(ends);
    data->flows_out[ends.src].push_back(i);
    data->flows_in[ends.dst].push_back(i);
  }
  for (std::size_t i = 0; i < data->triggers.size(); ++i) {
    SModel::Ends ends{resolve(data->triggers[i].src, "trigger"),
                      resolve(data->triggers[i].dst, "trigger")};
    data->trigger_ends.push_back(ends);
    data->triggers_out[ends.src].push_back(i);
    data->triggers_in[ends.dst].push_back(i);
  }
  return SModel(std::move(data));
}

bool is_cross_thimac(const SModel& m, const FlowArc& arc) {
  const Stage* src = m.find_stage(arc.src);
  const Stage* dst = m.find_stage(arc.dst);
  return src && dst && src->owner != dst->owner;
}

}  // namespace tmkit
