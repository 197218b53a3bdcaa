#pragma once

// Decomposition of a static model into static changes and their atemporal
// ordering (the D model).

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

enum class ChangeKind : std::uint8_t {
  init,       // the start signal and the controller that receives it
  ready,      // the initial state coming up
  statePath,  // any other connected piece
  stimulus,   // an external signal delivered to a state
  shift,      // release from one state and receipt by another
  condition,  // a state's processing and the condition it triggers
};

std::string_view to_string(ChangeKind kind);

enum class ArcType : std::uint8_t { flow, trigger };

struct ArcRef {
  ArcType type = ArcType::flow;
  std::string src;
  std::string dst;

  friend auto operator<=>(const ArcRef&, const ArcRef&) = default;
};

struct StaticChange {
  std::string id;
  ChangeKind kind = ChangeKind::statePath;
  std::vector<std::string> stages;  // sorted
  std::vector<ArcRef> arcs;         // internal arcs, sorted
  std::string label;

  // Thimac ids, filled where the kind gives them meaning.
  std::optional<std::string> source_state;
  std::optional<std::string> target_state;
  /// Name of the delivered signal for stimulus changes.
  std::optional<std::string> stimulus;

  friend bool operator==(const StaticChange&, const StaticChange&) = default;
};

using ChangePair = std::pair<std::string, std::string>;

struct DModel {
  SModel source;
  std::vector<StaticChange> changes;  // sorted by id
  std::set<ChangePair> precedence;

  const StaticChange* find(std::string_view id) const;
  std::vector<std::string> successors(std::string_view id) const;
};

/// Default decomposition. Throws UnvalidatedModel if validate_s reports
/// anything.
std::vector<StaticChange> decompose(const SModel& m);

/// User-chosen decomposition; each region is a list of stage references.
/// Throws UnvalidatedModel, DanglingReference, OverlappingRegions,
/// UncoveredStage or DisconnectedRegion.
std::vector<StaticChange> decompose_with_regions(
    const SModel& m, const std::vector<std::vector<std::string>>& regions);

/// One region per line, comma separated stage references, `#` comments.
std::vector<std::vector<std::string>> parse_regions(std::string_view text);

/// Writes a decomposition back in region-file form.
std::string format_regions(const std::vector<StaticChange>& changes);

DModel order_changes(const SModel& m, std::vector<StaticChange> changes);

/// Pairs of changes entered by triggers leaving the same stage.
std::set<ChangePair> simultaneous(const DModel& d);

}  // namespace tmkit
