#pragma once

// Thinging-machine domain types: thimacs, stages, flow/trigger arcs and the
// static model (S) that ties them together.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tmkit {

/// The generic actions of a thinging machine. Transfer is split by direction
/// so that a transfer stage can never lack one.
enum class StageKind : std::uint8_t {
  create,
  process,
  release,
  transfer_input,
  transfer_output,
  receive,
  arrive,
  accept,
};

inline constexpr StageKind kAllStageKinds[] = {
    StageKind::create,         StageKind::process,
    StageKind::release,        StageKind::transfer_input,
    StageKind::transfer_output, StageKind::receive,
    StageKind::arrive,         StageKind::accept,
};

/// `create`, `transfer(input)`, ...
std::string_view to_string(StageKind kind);
std::optional<StageKind> stage_kind_from_string(std::string_view text);

bool is_transfer(StageKind kind);
/// receive, or its expanded arrive/accept form.
bool is_receive_phase(StageKind kind);

/// Logical time of an event, optionally carrying a wall-clock description.
struct TimeTag {
  std::uint64_t tick = 0;
  std::optional<std::string> wall_label;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

struct Stage {
  std::string id;  // "<owner>:<kind>[#ordinal]", assigned by build_model
  StageKind kind = StageKind::create;
  std::string owner;
  /// Set on an arrive stage written as `receive.arrive`: the simplified
  /// receive stage expanded into arrival (and possibly acceptance).
  bool expanded_receive = false;

  friend bool operator==(const Stage&, const Stage&) = default;
};

struct Thimac {
  std::string id;  // dot-separated ancestry, e.g. Car.Transmission.Neutral
  std::string label;
  std::vector<Stage> stages;
  std::vector<Thimac> subthimacs;
  std::optional<TimeTag> time;  // only on event thimacs

  std::string_view segment() const;

  friend bool operator==(const Thimac&, const Thimac&) = default;
};

struct FlowArc {
  std::string src;
  std::string dst;
  std::optional<std::string> annotation;

  friend bool operator==(const FlowArc&, const FlowArc&) = default;
};

struct TriggerArc {
  std::string src;
  std::string dst;

  friend bool operator==(const TriggerArc&, const TriggerArc&) = default;
};

/// Canonical stage id for the `ordinal`-th stage of `kind` inside `thimac`.
std::string stage_ref(std::string_view thimac, StageKind kind,
                      std::size_t ordinal = 0);

std::string child_id(std::string_view parent, std::string_view segment);
bool is_identifier(std::string_view text);

/// Immutable static model. Copies share the underlying data.
class SModel {
 public:
  const std::string& name() const;
  const Thimac& root() const;
  std::span<const FlowArc> flows() const;
  std::span<const TriggerArc> triggers() const;

  /// All stages in thimac pre-order, declaration order within a thimac.
  std::span<const Stage> stages() const;
  /// Thimacs in pre-order.
  std::span<const Thimac* const> thimacs() const;

  const Stage* find_stage(std::string_view id) const;
  const Thimac* find_thimac(std::string_view id) const;
  /// Position of a stage in stages(); throws DanglingReference if unknown.
  std::size_t stage_index(std::string_view id) const;
  const Thimac& owner(std::size_t stage) const;

  struct Ends {
    std::size_t src;
    std::size_t dst;
  };
  /// Stage indices of an arc's endpoints.
  Ends flow_ends(std::size_t arc) const;
  Ends trigger_ends(std::size_t arc) const;

  // Arc indices touching a stage, in arc order.
  std::span<const std::size_t> flows_out(std::size_t stage) const;
  std::span<const std::size_t> flows_in(std::size_t stage) const;
  std::span<const std::size_t> triggers_out(std::size_t stage) const;
  std::span<const std::size_t> triggers_in(std::size_t stage) const;

  friend bool operator==(const SModel& a, const SModel& b);

 private:
  struct Data;
  explicit SModel(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;

  friend SModel build_model(std::string name, Thimac root,
                            std::vector<FlowArc> flows,
                            std::vector<TriggerArc> triggers);
};

/// Assigns stage ids and owners, resolves arc endpoints and sorts arcs by
/// (src, dst). Does not validate the flow grammar; see validate_s.
/// Throws DuplicateId, InvalidId, DanglingReference or DuplicateArc.
SModel build_model(std::string name, Thimac root, std::vector<FlowArc> flows,
                   std::vector<TriggerArc> triggers);

inline SModel build_model(Thimac root, std::vector<FlowArc> flows = {},
                          std::vector<TriggerArc> triggers = {}) {
  std::string name = root.id;
  return build_model(std::move(name), std::move(root), std::move(flows),
                     std::move(triggers));
}

/// True when src and dst stages belong to different thimacs.
bool is_cross_thimac(const SModel& m, const FlowArc& arc);

// ---------------------------------------------------------------------------
// Validation

enum class Rule : std::uint8_t {
  path_shape,
  path_cycle,
  cross_flow,
  trigger_target,
  trigger_over_flow,
  trigger_self,
};

std::string_view to_string(Rule rule);

struct Diagnostic {
  Rule rule = Rule::path_shape;
  std::vector<std::string> stages;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
  friend auto operator<=>(const Diagnostic& a, const Diagnostic& b) {
    if (auto c = a.rule <=> b.rule; c != 0) return c;
    if (auto c = a.stages <=> b.stages; c != 0) return c;
    return a.message <=> b.message;
  }
};

/// Checks every maximal intra-thimac flow path against the generative and
/// inbound path templates, cross-thimac flows and trigger targets.
/// Diagnostics come back sorted; an empty result means the model is valid.
std::vector<Diagnostic> validate_s(const SModel& m);

/// Path template recognizer used by validate_s. States are opaque; feed
/// kinds one at a time starting from `start()`.
class PathTemplate {
 public:
  using State = std::uint8_t;
  static constexpr State start() { return 0; }
  static State next(State state, StageKind kind);
  static bool dead(State state);
  static bool accepting(State state);
  static bool matches(std::span<const StageKind> path);
};

}  // namespace tmkit
