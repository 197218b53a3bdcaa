#pragma once

// Graphviz DOT text for the three model stages. Layout is left to the tool.

#include <string>

#include "tmkit/behavior.hpp"
#include "tmkit/model.hpp"
#include "tmkit/statics.hpp"

namespace tmkit {

enum class DiagramKind { s_model, d_model, b_model };

struct DiagramDoc {
  DiagramKind kind = DiagramKind::s_model;
  std::string text;
};

/// Nested clusters per thimac, a node per stage, solid flows, dashed triggers.
DiagramDoc render_s(const SModel& m);

/// A node per change filled by kind, an edge per precedence pair.
DiagramDoc render_d(const DModel& d);

/// A node per event, events of one tick on one rank, edges along causes.
DiagramDoc render_b(const BModel& b);

}  // namespace tmkit
