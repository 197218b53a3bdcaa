#pragma once

// Textual forms of a static model: the dotted flow-string notation
// (`Flow.create.process.release.transfer.output`) and the `.tm` model file.
// The grammar of `.tm` files lives in docs/grammar.ebnf.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

struct FlowString {
  std::string owner;  // thimac the path belongs to; empty when unknown
  std::string text;

  friend bool operator==(const FlowString&, const FlowString&) = default;
};

struct FlowPath {
  std::vector<Stage> stages;
  std::vector<FlowArc> arcs;  // consecutive stages, in order
};

/// Turns `Flow.<token>...` into stages owned by `owner` and the arcs joining
/// consecutive stages. `existing` lists kinds already declared in the owner,
/// so ordinals continue after them. `receive.arrive` collapses into a single
/// arrive stage flagged as an expanded receive.
/// Throws EmptyFlowString, UnknownToken or MisplacedDirection.
FlowPath parse_flow_string(std::string_view text, std::string_view owner,
                           std::span<const StageKind> existing = {});

/// Stage kinds of a flow string, without ids. Same errors as above.
std::vector<StageKind> flow_string_kinds(std::string_view text);

/// Spells a stage sequence as a flow string.
std::string format_flow_string(std::span<const Stage> stages);

/// Parses a `.tm` file. Errors carry line and column.
SModel parse_model(std::string_view source);

/// Canonical `.tm` text: stage order preserved, arcs sorted by (src, dst).
std::string print_model(const SModel& m);

/// One flow string per maximal intra-thimac path, thimacs in pre-order and
/// paths in stage order.
std::vector<FlowString> to_flow_strings(const SModel& m);

/// `<thimac-id>:<kind>[#ordinal]` normalized to the canonical stage id, so
/// `A:create#0` and `A:create` name the same stage. Throws Syntax.
std::string parse_stage_ref(std::string_view text);

/// Escapes `"` and `\` and wraps the text in double quotes.
std::string quote(std::string_view text);

}  // namespace tmkit
