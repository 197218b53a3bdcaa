#include <map>
#include <sstream>

#include "tmkit/dsl.hpp"
#include "tmkit/render.hpp"

namespace tmkit {

namespace {

// DOT string literals share the escaping rules of model labels.
std::string id(std::string_view text) { return quote(text); }

void emit_cluster(std::ostringstream& out, const Thimac& thimac, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  out << pad << "subgraph " << id("cluster_" + thimac.id) << " {\n"
      << pad << "  label=" << id(thimac.label) << ";\n";
  for (const Stage& stage : thimac.stages) {
    out << pad << "  " << id(stage.id) << " [label="
        << id(std::string(to_string(stage.kind))) << "];\n";
  }
  for (const Thimac& child : thimac.subthimacs) emit_cluster(out, child, depth + 1);
  out << pad << "}\n";
}

std::string_view fill(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::init: return "palegreen";
    case ChangeKind::ready: return "lightblue";
    case ChangeKind::statePath: return "white";
    case ChangeKind::stimulus: return "khaki";
    case ChangeKind::shift: return "lightsalmon";
    case ChangeKind::condition: return "plum";
  }
  return "white";
}

}  // namespace

DiagramDoc render_s(const SModel& m) {
  std::ostringstream out;
  out << "digraph " << id(m.name()) << " {\n"
      << "  compound=true;\n  node [shape=box, style=rounded];\n";
  emit_cluster(out, m.root(), 1);
  for (const FlowArc& arc : m.flows()) {
    out << "  " << id(arc.src) << " -> " << id(arc.dst);
    if (arc.annotation) out << " [label=" << id(*arc.annotation) << "]";
    out << ";\n";
  }
  for (const TriggerArc& arc : m.triggers()) {
    out << "  " << id(arc.src) << " -> " << id(arc.dst) << " [style=dashed];\n";
  }
  out << "}\n";
  return {DiagramKind::s_model, out.str()};
}

DiagramDoc render_d(const DModel& d) {
  std::ostringstream out;
  out << "digraph " << id(d.source.name() + "_D") << " {\n"
      << "  node [shape=box, style=filled];\n";
  for (const StaticChange& change : d.changes) {
    out << "  " << id(change.id) << " [label=" << id(change.label)
        << ", fillcolor=" << fill(change.kind) << "];\n";
  }
  for (const auto& [a, b] : d.precedence) {
    out << "  " << id(a) << " -> " << id(b) << ";\n";
  }
  out << "}\n";
  return {DiagramKind::d_model, out.str()};
}

DiagramDoc render_b(const BModel& b) {
  std::ostringstream out;
  out << "digraph \"B\" {\n  rankdir=LR;\n  node [shape=box];\n";
  std::map<std::uint64_t, std::vector<const Event*>> by_tick;
  for (const Event& event : b.events) by_tick[event.time.tick].push_back(&event);
  for (const auto& [tick, events] : by_tick) {
    out << "  { rank=same;";
    for (const Event* event : events) out << ' ' << id(event->id) << ';';
    out << " }\n";
  }
  for (const Event& event : b.events) {
    out << "  " << id(event.id) << " [label="
        << id(event.id + " @" + std::to_string(event.time.tick) + "\n" + event.name)
        << "];\n";
  }
  for (const Event& event : b.events) {
    if (event.caused_by) {
      out << "  " << id(*event.caused_by) << " -> " << id(event.id) << ";\n";
    }
  }
  out << "}\n";
  return {DiagramKind::b_model, out.str()};
}

}  // namespace tmkit
